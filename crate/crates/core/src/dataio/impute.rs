use crate::error::{Error, Result};

/// Backward fill: each gap takes the next observed value.
///
/// A trailing gap has no later value and takes the last observed value instead.
pub fn backward_fill<T: Copy>(column: &[Option<T>]) -> Result<Vec<T>> {
    if column.is_empty() {
        return Err(Error::Empty("column"));
    }
    let last_seen = column
        .iter()
        .rev()
        .find_map(|c| *c)
        .ok_or_else(|| Error::AllMissing("column".into()))?;
    let mut out = Vec::with_capacity(column.len());
    let mut next = last_seen;
    for cell in column.iter().rev() {
        if let Some(v) = *cell {
            next = v;
        }
        out.push(next);
    }
    out.reverse();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fills_gaps_from_the_following_value() {
        let got = backward_fill(&[None, Some(2.0), None, Some(5.0)]).unwrap();
        assert_eq!(got, vec![2.0, 2.0, 5.0, 5.0]);
    }

    #[test]
    fn complete_column_unchanged() {
        assert_eq!(backward_fill(&[Some(1.0), Some(2.0), Some(3.0)]).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn trailing_gap_falls_back_to_previous() {
        assert_eq!(backward_fill(&[Some(1.0), None, None]).unwrap(), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn all_missing_is_an_error() {
        assert!(matches!(backward_fill::<f64>(&[None, None]), Err(Error::AllMissing(_))));
        assert!(backward_fill::<f64>(&[]).is_err());
    }

    proptest! {
        #[test]
        fn idempotent_and_preserves_observed(col in prop::collection::vec(prop::option::of(-1e6f64..1e6), 1..40)) {
            prop_assume!(col.iter().any(Option::is_some));
            let once = backward_fill(&col).unwrap();
            for (orig, filled) in col.iter().zip(&once) {
                if let Some(v) = orig {
                    prop_assert_eq!(v, filled);
                }
            }
            let again = backward_fill(&once.iter().copied().map(Some).collect::<Vec<_>>()).unwrap();
            prop_assert_eq!(once, again);
        }
    }
}
