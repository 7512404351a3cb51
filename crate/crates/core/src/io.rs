//! Text formatting shared by the CSV writers.

/// Scientific notation with 17 significant digits; round-trips every `f64`.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}
