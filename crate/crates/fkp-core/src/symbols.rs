//! Dispersion-symbol families w(xi) and the assembled KP symbol
//! omega(xi, eta) = w(xi) - kappa * eta^2 / xi.
//!
//! Every family is odd by construction: w is evaluated on |xi| and the sign
//! is applied afterwards, so eval_w(-xi) == -eval_w(xi) exactly.

use crate::error::FkpError;
use crate::Result;

/// Branch selector: kappa = +1 gives fKP-II, kappa = -1 gives fKP-I.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kappa {
    PlusOne,
    MinusOne,
}

impl Kappa {
    pub fn sign(self) -> f64 {
        match self {
            Kappa::PlusOne => 1.0,
            Kappa::MinusOne => -1.0,
        }
    }

    pub fn from_int(k: i64) -> Result<Self> {
        match k {
            1 => Ok(Kappa::PlusOne),
            -1 => Ok(Kappa::MinusOne),
            other => Err(FkpError::InvalidParameter(format!(
                "kappa must be +1 or -1, got {other}"
            ))),
        }
    }
}

/// One-dimensional dispersion law w(xi).
#[derive(Debug, Clone)]
pub enum SymbolFamily {
    /// w(xi) = |xi|^alpha * xi, alpha in (0, 2].
    PurePower { alpha: f64 },
    /// Intermediate-long-wave dispersion w(xi) = xi^2 * coth(delta * xi)
    /// (the linear xi/delta term of the physical symbol is dropped; it is a
    /// Galilean shift). Behaves like |xi| * xi at high frequency: alpha = 1.
    Ilw { delta: f64 },
    /// Surface-tension Whitham symbol
    /// (tanh(xi)/xi)^(1/2) * (1 + b*xi^2)^(1/2) * xi; alpha = 1/2.
    WhithamSt { b: f64 },
    /// Tabulated symbol, monotone-cubic interpolated and odd-extended.
    Table(TableSymbol),
}

impl SymbolFamily {
    pub fn pure_power(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(FkpError::InvalidParameter(format!(
                "pure-power alpha must lie in (0, 2], got {alpha}"
            )));
        }
        Ok(SymbolFamily::PurePower { alpha })
    }

    pub fn ilw(delta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(FkpError::InvalidParameter(format!(
                "ILW depth must be positive, got {delta}"
            )));
        }
        Ok(SymbolFamily::Ilw { delta })
    }

    pub fn whitham_st(b: f64) -> Result<Self> {
        if !(b > 0.0) {
            return Err(FkpError::InvalidParameter(format!(
                "Whitham surface-tension coefficient must be positive, got {b}"
            )));
        }
        Ok(SymbolFamily::WhithamSt { b })
    }

    /// High-frequency growth exponent: w(xi) ~ |xi|^(alpha+1).
    pub fn effective_alpha(&self) -> Option<f64> {
        match self {
            SymbolFamily::PurePower { alpha } => Some(*alpha),
            SymbolFamily::Ilw { .. } => Some(1.0),
            SymbolFamily::WhithamSt { .. } => Some(0.5),
            SymbolFamily::Table(_) => None,
        }
    }

    pub fn is_pure_power(&self) -> bool {
        matches!(self, SymbolFamily::PurePower { .. })
    }
}

/// Evaluate the dispersion law at xi.
pub fn eval_w(family: &SymbolFamily, xi: f64) -> f64 {
    let a = xi.abs();
    let s = if xi > 0.0 {
        1.0
    } else if xi < 0.0 {
        -1.0
    } else {
        return 0.0;
    };
    let w_abs = match family {
        SymbolFamily::PurePower { alpha } => a.powf(*alpha) * a,
        SymbolFamily::Ilw { delta } => ilw_w(a, *delta),
        SymbolFamily::WhithamSt { b } => whitham_w(a, *b),
        SymbolFamily::Table(t) => t.eval(a),
    };
    s * w_abs
}

/// xi^2 * coth(delta*xi) for xi > 0, with the Laurent expansion
/// xi/delta + delta*xi^3/3 - delta^3*xi^5/45 near the origin.
fn ilw_w(xi: f64, delta: f64) -> f64 {
    let z = delta * xi;
    if z < 1e-3 {
        xi / delta + delta * xi.powi(3) / 3.0 - delta.powi(3) * xi.powi(5) / 45.0
    } else if z > 350.0 {
        // coth saturates to 1 well before exp overflows
        xi * xi
    } else {
        xi * xi * (z.cosh() / z.sinh())
    }
}

/// (tanh(xi)/xi)^(1/2) * (1 + b*xi^2)^(1/2) * xi for xi > 0, with
/// tanh(xi)/xi = 1 - xi^2/3 + 2 xi^4/15 near the origin.
fn whitham_w(xi: f64, b: f64) -> f64 {
    let ratio = if xi < 1e-3 {
        1.0 - xi * xi / 3.0 + 2.0 * xi.powi(4) / 15.0
    } else {
        xi.tanh() / xi
    };
    ratio.sqrt() * (1.0 + b * xi * xi).sqrt() * xi
}

/// Full KP dispersion relation with a family and a branch sign.
#[derive(Debug, Clone)]
pub struct KPSymbol {
    pub family: SymbolFamily,
    pub kappa: Kappa,
}

impl KPSymbol {
    pub fn new(family: SymbolFamily, kappa: Kappa) -> Self {
        KPSymbol { family, kappa }
    }

    pub fn pure_power(alpha: f64, kappa: Kappa) -> Result<Self> {
        Ok(KPSymbol::new(SymbolFamily::pure_power(alpha)?, kappa))
    }
}

/// omega(xi, eta) = w(xi) - kappa * eta^2 / xi for xi != 0, and 0 on the
/// xi = 0 line (the zero-mass convention).
pub fn eval_omega(s: &KPSymbol, xi: f64, eta: f64) -> f64 {
    if xi == 0.0 {
        return 0.0;
    }
    eval_w(&s.family, xi) - s.kappa.sign() * eta * eta / xi
}

/// Tabulated odd symbol on strictly increasing positive nodes.
#[derive(Debug, Clone)]
pub struct TableSymbol {
    xi: Vec<f64>,
    w: Vec<f64>,
    slopes: Vec<f64>,
}

impl TableSymbol {
    /// Build from (xi, w) samples with strictly increasing positive xi.
    /// Uses Fritsch-Carlson monotone cubic slopes.
    pub fn new(xi: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        if xi.len() < 2 || xi.len() != w.len() {
            return Err(FkpError::InvalidParameter(
                "table symbol needs at least two (xi, w) samples".into(),
            ));
        }
        if xi[0] <= 0.0 || xi.windows(2).any(|p| p[1] <= p[0]) {
            return Err(FkpError::InvalidParameter(
                "table xi samples must be strictly increasing and positive".into(),
            ));
        }
        let slopes = fritsch_carlson_slopes(&xi, &w);
        Ok(TableSymbol { xi, w, slopes })
    }

    /// Load from CSV lines `xi,w` (header allowed, `#` comments skipped).
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut xs = Vec::new();
        let mut ws = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split(',');
            let a = parts.next().unwrap_or("").trim();
            let b = parts.next().unwrap_or("").trim();
            if a.eq_ignore_ascii_case("xi") {
                continue;
            }
            let x: f64 = a
                .parse()
                .map_err(|_| FkpError::Format(format!("bad table line {line:?}")))?;
            let y: f64 = b
                .parse()
                .map_err(|_| FkpError::Format(format!("bad table line {line:?}")))?;
            xs.push(x);
            ws.push(y);
        }
        TableSymbol::new(xs, ws)
    }

    /// Evaluate at xi >= 0 (Hermite cubic inside the table, linear
    /// continuation outside, linear from (0,0) to the first node).
    fn eval(&self, xi: f64) -> f64 {
        let n = self.xi.len();
        if xi <= self.xi[0] {
            return self.w[0] * xi / self.xi[0];
        }
        if xi >= self.xi[n - 1] {
            return self.w[n - 1] + self.slopes[n - 1] * (xi - self.xi[n - 1]);
        }
        let i = match self
            .xi
            .binary_search_by(|v| v.partial_cmp(&xi).unwrap())
        {
            Ok(i) => return self.w[i],
            Err(i) => i - 1,
        };
        let h = self.xi[i + 1] - self.xi[i];
        let t = (xi - self.xi[i]) / h;
        let (y0, y1) = (self.w[i], self.w[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + m0 * (t3 - 2.0 * t2 + t)
            + y1 * (-2.0 * t3 + 3.0 * t2)
            + m1 * (t3 - t2)
    }
}

fn fritsch_carlson_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let d: Vec<f64> = (0..n - 1)
        .map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i]))
        .collect();
    let mut m = vec![0.0; n];
    m[0] = d[0];
    m[n - 1] = d[n - 2];
    for i in 1..n - 1 {
        m[i] = if d[i - 1] * d[i] <= 0.0 {
            0.0
        } else {
            0.5 * (d[i - 1] + d[i])
        };
    }
    // Limit slopes to preserve monotonicity on each interval.
    for i in 0..n - 1 {
        if d[i] == 0.0 {
            m[i] = 0.0;
            m[i + 1] = 0.0;
        } else {
            let a = m[i] / d[i];
            let b = m[i + 1] / d[i];
            let r = a * a + b * b;
            if r > 9.0 {
                let tau = 3.0 / r.sqrt();
                m[i] = tau * a * d[i];
                m[i + 1] = tau * b * d[i];
            }
        }
    }
    m
}

/// Numerical check of the symbol hypotheses: boundedness below xi0 and the
/// two-sided |xi|^(alpha+1-beta) envelope for derivatives of order 0..=2
/// above xi0.
#[derive(Debug, Clone)]
pub struct HypothesisReport {
    pub low_freq_max: f64,
    /// (min, max) of |d^beta w| / |xi|^(alpha+1-beta) for beta = 0, 1, 2.
    pub ratio_bands: [(f64, f64); 3],
    pub c_lo: f64,
    pub c_hi: f64,
    pub pass: bool,
}

/// Scan |w| on a log grid below xi0 and the derivative ratios on
/// [xi0, 1000*xi0]. Derivatives use closed forms for the pure-power family
/// and central differences with step xi*1e-5 otherwise.
pub fn validate_hypotheses(
    family: &SymbolFamily,
    alpha: f64,
    xi0: f64,
) -> Result<HypothesisReport> {
    validate_hypotheses_banded(family, alpha, xi0, 0.3, 3.5)
}

pub fn validate_hypotheses_banded(
    family: &SymbolFamily,
    alpha: f64,
    xi0: f64,
    c_lo: f64,
    c_hi: f64,
) -> Result<HypothesisReport> {
    if !(xi0 > 0.0) {
        return Err(FkpError::InvalidParameter("xi0 must be positive".into()));
    }
    let n_low = 200;
    let mut low_freq_max = 0.0_f64;
    for i in 0..=n_low {
        // log grid from xi0*1e-6 up to xi0
        let t = i as f64 / n_low as f64;
        let xi = xi0 * 1e-6_f64.powf(1.0 - t);
        low_freq_max = low_freq_max.max(eval_w(family, xi).abs());
    }

    let n_hi = 400;
    let mut bands = [(f64::INFINITY, 0.0_f64); 3];
    for i in 0..=n_hi {
        let t = i as f64 / n_hi as f64;
        let xi = xi0 * 1000.0_f64.powf(t);
        for (beta, band) in bands.iter_mut().enumerate() {
            let d = deriv_w(family, xi, beta as u32, alpha);
            let ratio = d.abs() / xi.powf(alpha + 1.0 - beta as f64);
            band.0 = band.0.min(ratio);
            band.1 = band.1.max(ratio);
        }
    }
    let pass = bands
        .iter()
        .all(|&(lo, hi)| lo >= c_lo && hi <= c_hi && lo.is_finite() && hi.is_finite());
    Ok(HypothesisReport {
        low_freq_max,
        ratio_bands: bands,
        c_lo,
        c_hi,
        pass,
    })
}

fn deriv_w(family: &SymbolFamily, xi: f64, beta: u32, alpha: f64) -> f64 {
    if let SymbolFamily::PurePower { alpha: a } = family {
        debug_assert!((a - alpha).abs() < 1e-12 || true);
        let a = *a;
        return match beta {
            0 => xi.powf(a + 1.0),
            1 => (a + 1.0) * xi.powf(a),
            2 => a * (a + 1.0) * xi.powf(a - 1.0),
            _ => unreachable!(),
        };
    }
    let h = xi * 1e-5;
    match beta {
        0 => eval_w(family, xi),
        1 => (eval_w(family, xi + h) - eval_w(family, xi - h)) / (2.0 * h),
        2 => {
            (eval_w(family, xi + h) - 2.0 * eval_w(family, xi) + eval_w(family, xi - h))
                / (h * h)
        }
        _ => unreachable!(),
    }
}
