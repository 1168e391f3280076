//! Shared deterministic float formatting for text artifacts (reports, masks,
//! filter dumps): 17 significant digits, enough to round-trip any f64.

pub(crate) fn fmt_g17(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".to_string() } else { "-inf".to_string() };
    }
    format!("{:.16e}", x)
}
