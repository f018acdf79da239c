/// Jain's fairness index `(sum r)^2 / (K sum r^2)`.
///
/// Returns `None` when every rate is zero, where the index is 0/0.
pub fn jain_index(rates: &[f64]) -> Option<f64> {
    let sum: f64 = rates.iter().sum();
    let sq: f64 = rates.iter().map(|r| r * r).sum();
    if sq == 0.0 {
        return None;
    }
    Some(sum * sum / (rates.len() as f64 * sq))
}
