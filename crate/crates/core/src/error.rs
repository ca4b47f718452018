use thiserror::Error;

/// Errors raised by the model, analytic, Monte Carlo and simulation engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The link is in SNR outage on its own, so no interferer distance can
    /// bring the SINR down to the threshold and the range is undefined.
    #[error("no interference range: link of length {link_length} m is below the SINR threshold without interference")]
    NoInterferenceRange { link_length: f64 },

    #[error("{what} = {value} is outside its domain [{lo}, {hi}]")]
    Domain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("success probability is zero, expected delay is infinite")]
    DegenerateDelay,

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

/// Checks `lo <= value <= hi`, allowing a relative slack of 1e-12 at the ends
/// so values produced by floating-point round trips are not rejected.
pub(crate) fn check_domain(what: &'static str, value: f64, lo: f64, hi: f64) -> Result<()> {
    let slack = 1e-12 * hi.abs().max(1.0);
    if value.is_nan() || value < lo - slack || value > hi + slack {
        return Err(Error::Domain {
            what,
            value,
            lo,
            hi,
        });
    }
    Ok(())
}
