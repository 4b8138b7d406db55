use crate::error::{invalid, Error, Result};

/// Average proportion: the mean fraction of the source read before each
/// target word was committed, `sum(trace) / (src_len * trace.len())`.
pub fn average_proportion(trace: &[usize], src_len: usize) -> Result<f64> {
    if trace.is_empty() {
        return Err(Error::UndefinedAp("empty translation".into()));
    }
    if src_len == 0 {
        return Err(invalid("source length must be positive"));
    }
    if let Some(&bad) = trace.iter().find(|&&s| s == 0 || s > src_len) {
        return Err(invalid(format!("trace entry {bad} outside 1..={src_len}")));
    }
    let total: usize = trace.iter().sum();
    Ok(total as f64 / (src_len as f64 * trace.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worst_case_is_one() {
        assert_eq!(average_proportion(&[5, 5, 5], 5).unwrap(), 1.0);
        assert_eq!(average_proportion(&[1], 1).unwrap(), 1.0);
    }

    #[test]
    fn arithmetic() {
        assert_eq!(average_proportion(&[1, 2, 3, 4], 4).unwrap(), 0.625);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(average_proportion(&[], 4), Err(Error::UndefinedAp(_))));
        assert!(average_proportion(&[5], 4).is_err());
        assert!(average_proportion(&[0], 4).is_err());
        assert!(average_proportion(&[1], 0).is_err());
    }
}
