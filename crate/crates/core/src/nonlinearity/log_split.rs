//! Splitting of the logarithmic nonlinearity `z log|z|²` into a convex part
//! `a` (small amplitudes, singular slope at the origin) and a part `b` that
//! vanishes identically below `e⁻³`.

/// `e⁻³`, the junction of the two branches of `A`.
pub const JUNCTION: f64 = 0.049_787_068_367_863_944;
const J2: f64 = JUNCTION * JUNCTION;

/// Below this modulus every profile evaluates to zero.
pub const TINY: f64 = 1e-300;

/// `F(x) = x² log x²`.
pub fn f_weight(x: f64) -> f64 {
    if x <= TINY {
        0.0
    } else {
        x * x * (x * x).ln()
    }
}

/// Orlicz weight `A`: `-x² log x²` on `(0, e⁻³]`, `3x² + 4e⁻³x − e⁻⁶` beyond.
pub fn orlicz_weight(x: f64) -> f64 {
    if x <= TINY {
        0.0
    } else if x <= JUNCTION {
        -x * x * (x * x).ln()
    } else {
        3.0 * x * x + 4.0 * JUNCTION * x - J2
    }
}

/// `B = F + A`.
pub fn b_weight(x: f64) -> f64 {
    if x <= JUNCTION {
        0.0
    } else {
        f_weight(x) + orlicz_weight(x)
    }
}

/// `a(x) / x`.
pub fn a_rate(x: f64) -> f64 {
    if x <= JUNCTION {
        -(x * x).ln()
    } else {
        3.0 + 4.0 * JUNCTION / x - J2 / (x * x)
    }
}

/// `b(x) / x`.
pub fn b_rate(x: f64) -> f64 {
    if x <= JUNCTION {
        0.0
    } else {
        (x * x).ln() + 3.0 + 4.0 * JUNCTION / x - J2 / (x * x)
    }
}

/// `a(x) = A(x)/x`.
pub fn a_profile(x: f64) -> f64 {
    if x <= TINY {
        0.0
    } else {
        x * a_rate(x)
    }
}

/// `b(x) = B(x)/x`.
pub fn b_profile(x: f64) -> f64 {
    if x <= TINY {
        0.0
    } else {
        x * b_rate(x)
    }
}

/// `∫₀ˣ s log s² ds = x²/2 log x² − x²/2`.
pub fn log_primitive(x: f64) -> f64 {
    if x <= TINY {
        0.0
    } else {
        0.5 * x * x * ((x * x).ln() - 1.0)
    }
}

fn quadratic_branch_primitive(x: f64) -> f64 {
    // antiderivative of 3s + 4e⁻³ − e⁻⁶/s
    1.5 * x * x + 4.0 * JUNCTION * x - J2 * x.ln()
}

/// `Φ(x) = ∫₀ˣ a`.
pub fn a_primitive(x: f64) -> f64 {
    if x <= TINY {
        0.0
    } else if x <= JUNCTION {
        0.5 * x * x * (1.0 - (x * x).ln())
    } else {
        3.5 * J2 + quadratic_branch_primitive(x) - quadratic_branch_primitive(JUNCTION)
    }
}

/// `Ψ(x) = ∫₀ˣ b`.
pub fn b_primitive(x: f64) -> f64 {
    if x <= JUNCTION {
        0.0
    } else {
        log_primitive(x) - log_primitive(JUNCTION) + quadratic_branch_primitive(x)
            - quadratic_branch_primitive(JUNCTION)
    }
}
