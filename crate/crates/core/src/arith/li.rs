//! Offset logarithmic integral `Li(x) = li(x) - li(2)`.

use super::ArithError;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `li(2)`.
pub const LI_2: f64 = 1.045_163_780_117_492_8;

/// `li(x)` for `x > 1` from the series `gamma + ln ln x + sum (ln x)^k / (k k!)`.
/// All terms are positive, so there is no cancellation.
fn li(x: f64) -> f64 {
    let l = x.ln();
    let mut term = 1.0;
    let mut sum = 0.0;
    let mut k = 1.0;
    loop {
        term *= l / k;
        let add = term / k;
        sum += add;
        if add < sum * 1e-17 {
            break;
        }
        k += 1.0;
    }
    EULER_GAMMA + l.ln() + sum
}

/// `Li(x) = integral from 2 to x of dt / ln t`.
pub fn log_integral(x: f64) -> Result<f64, ArithError> {
    if !(x >= 2.0) || !x.is_finite() {
        return Err(ArithError::Domain(x));
    }
    if x == 2.0 {
        return Ok(0.0);
    }
    Ok(li(x) - LI_2)
}
