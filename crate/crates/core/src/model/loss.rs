use ndarray::{Array1, Array2};

use super::ModelError;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Cosine similarity, clamped to `[-1, 1]`.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, ModelError> {
    if u.len() != v.len() {
        return Err(ModelError::Dimension {
            expected: u.len(),
            got: v.len(),
        });
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(ModelError::UndefinedSimilarity);
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

/// `cos(a, b)` with its gradients with respect to `a` and `b`.
pub(crate) fn cosine_with_grads(
    a: &Array1<f64>,
    b: &Array1<f64>,
) -> Result<(f64, Array1<f64>, Array1<f64>), ModelError> {
    let (na, nb) = (a.dot(a).sqrt(), b.dot(b).sqrt());
    if na == 0.0 || nb == 0.0 {
        return Err(ModelError::UndefinedSimilarity);
    }
    let c = a.dot(b) / (na * nb);
    let grad_a = b / (na * nb) - a * (c / (na * na));
    let grad_b = a / (na * nb) - b * (c / (nb * nb));
    Ok((c, grad_a, grad_b))
}

/// `max(s_neg - s_pos + margin, 0)`.
pub fn hinge(s_pos: f64, s_neg: f64, margin: f64) -> f64 {
    (s_neg - s_pos + margin).max(0.0)
}

/// Ranking loss of one process against one positive and one or more
/// negative gloss vectors, averaged over the negatives.
pub fn process_loss(
    process: &[f64],
    positive: &[f64],
    negatives: &[&[f64]],
    projection: &Array2<f64>,
    margin: f64,
) -> Result<f64, ModelError> {
    if negatives.is_empty() {
        return Err(ModelError::Config("at least one negative is required".into()));
    }
    if projection.ncols() != process.len() {
        return Err(ModelError::Dimension {
            expected: projection.ncols(),
            got: process.len(),
        });
    }
    let q = projection.dot(&Array1::from(process.to_vec()));
    let q = q.as_slice().expect("contiguous");
    let s_pos = cosine(q, positive)?;
    let mut total = 0.0;
    for neg in negatives {
        total += hinge(s_pos, cosine(q, neg)?, margin);
    }
    Ok(total / negatives.len() as f64)
}

/// Per-process objective: the sum of the action and object ranking losses.
pub fn joint_loss(action_loss: f64, object_loss: f64) -> f64 {
    action_loss + object_loss
}

/// Gradients of one axis term with respect to the projected query and the
/// gloss embeddings.
pub(crate) struct AxisTermGrads {
    pub loss: f64,
    pub d_query: Array1<f64>,
    pub d_positive: Array1<f64>,
    pub d_negatives: Vec<Array1<f64>>,
}

pub(crate) fn axis_term(
    query: &Array1<f64>,
    positive: &Array1<f64>,
    negatives: &[Array1<f64>],
    margin: f64,
) -> Result<AxisTermGrads, ModelError> {
    let k = negatives.len() as f64;
    let (s_pos, dq_pos, db_pos) = cosine_with_grads(query, positive)?;
    let mut out = AxisTermGrads {
        loss: 0.0,
        d_query: Array1::zeros(query.len()),
        d_positive: Array1::zeros(positive.len()),
        d_negatives: Vec::with_capacity(negatives.len()),
    };
    for neg in negatives {
        let (s_neg, dq_neg, db_neg) = cosine_with_grads(query, neg)?;
        let l = hinge(s_pos, s_neg, margin);
        out.loss += l / k;
        if l > 0.0 {
            out.d_query += &((&dq_neg - &dq_pos) / k);
            out.d_positive -= &(&db_pos / k);
            out.d_negatives.push(db_neg / k);
        } else {
            out.d_negatives.push(Array1::zeros(neg.len()));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(cosine(&[1.0, 0.0], &[-1.0, 0.0]).unwrap(), -1.0);
        assert!(matches!(cosine(&[0.0, 0.0], &[1.0, 0.0]), Err(ModelError::UndefinedSimilarity)));
        assert!(cosine(&[1.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn hinge_examples() {
        assert_eq!(hinge(0.9, 0.3, 0.2), 0.0);
        assert!((hinge(0.5, 0.6, 0.1) - 0.2).abs() < 1e-12);
        for x in [-1.0, 0.0, 0.37, 1.0] {
            assert_eq!(hinge(x, x, 0.0), 0.0);
        }
    }

    #[test]
    fn process_loss_examples() {
        let id = Array2::eye(2);
        let l = process_loss(&[1.0, 0.0], &[1.0, 0.0], &[&[0.0, 1.0]], &id, 0.2).unwrap();
        assert!(l.abs() < 1e-12);
        let l = process_loss(&[1.0, 0.0], &[0.0, 1.0], &[&[1.0, 0.0]], &id, 0.2).unwrap();
        assert!((l - 1.2).abs() < 1e-12);
        let zero = Array2::zeros((2, 2));
        assert!(process_loss(&[1.0, 0.0], &[0.0, 1.0], &[&[1.0, 0.0]], &zero, 0.2).is_err());
    }

    #[test]
    fn cosine_gradient_matches_finite_differences() {
        let a = array![0.3, -1.2, 0.7];
        let b = array![1.1, 0.4, -0.5];
        let (_, ga, gb) = cosine_with_grads(&a, &b).unwrap();
        let h = 1e-6;
        for i in 0..3 {
            let mut ap = a.clone();
            ap[i] += h;
            let mut am = a.clone();
            am[i] -= h;
            let fd = (cosine_with_grads(&ap, &b).unwrap().0 - cosine_with_grads(&am, &b).unwrap().0) / (2.0 * h);
            assert!((fd - ga[i]).abs() < 1e-8);
            let mut bp = b.clone();
            bp[i] += h;
            let mut bm = b.clone();
            bm[i] -= h;
            let fd = (cosine_with_grads(&a, &bp).unwrap().0 - cosine_with_grads(&a, &bm).unwrap().0) / (2.0 * h);
            assert!((fd - gb[i]).abs() < 1e-8);
        }
    }
}
