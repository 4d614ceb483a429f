use std::sync::Arc;

use rand::seq::SliceRandom;

use super::{Dataset, PointRef, StreamError, SyntheticModel};
use crate::linalg::RngState;

/// What a stream draws its points from. Cheap to clone; the heavy data is shared.
#[derive(Clone, Debug)]
pub enum Backing {
    Synthetic(Arc<SyntheticModel>),
    Dataset(Arc<Dataset>),
}

impl Backing {
    pub fn dim(&self) -> usize {
        match self {
            Backing::Synthetic(m) => m.dim(),
            Backing::Dataset(d) => d.dim(),
        }
    }
}

/// Deterministic point stream fixed by `(backing, order_seed)`.
///
/// Synthetic backings yield i.i.d. draws. Dataset backings yield the points
/// in a uniformly random order, each exactly once per pass, reshuffling at the
/// start of every pass (sampling without replacement within a pass).
#[derive(Debug)]
pub struct StreamSource {
    backing: Backing,
    rng: RngState,
    position: u64,
    buffer: Vec<f64>,
    order: Vec<u32>,
    cursor: usize,
}

pub fn make_stream(backing: Backing, order_seed: u64) -> Result<StreamSource, StreamError> {
    let (buffer, order) = match &backing {
        Backing::Synthetic(m) => (vec![0.0; m.dim()], Vec::new()),
        Backing::Dataset(d) => {
            if d.is_empty() {
                return Err(StreamError::InvalidArgument("cannot stream an empty dataset".into()));
            }
            if d.len() > u32::MAX as usize {
                return Err(StreamError::InvalidArgument("dataset too large to index".into()));
            }
            (Vec::new(), (0..d.len() as u32).collect())
        }
    };
    let cursor = order.len();
    Ok(StreamSource {
        backing,
        rng: RngState::new(order_seed),
        position: 0,
        buffer,
        order,
        cursor,
    })
}

impl StreamSource {
    pub fn dim(&self) -> usize {
        self.backing.dim()
    }

    /// Points emitted so far.
    pub fn position(&self) -> u64 {
        self.position
    }

    pub fn backing(&self) -> &Backing {
        &self.backing
    }

    pub fn next_point(&mut self) -> PointRef<'_> {
        self.position += 1;
        match &self.backing {
            Backing::Synthetic(model) => {
                model.sample_into(&mut self.rng, &mut self.buffer);
                PointRef::Dense(&self.buffer)
            }
            Backing::Dataset(data) => {
                if self.cursor == self.order.len() {
                    self.order.shuffle(&mut self.rng);
                    self.cursor = 0;
                }
                let idx = self.order[self.cursor] as usize;
                self.cursor += 1;
                PointRef::Sparse(&data.points()[idx])
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::streams::{SamplerKind, SparsePoint, SyntheticSpec};

    fn indexed_dataset(n: usize) -> Arc<Dataset> {
        // point i carries value (i+1)/n at coordinate i, so it identifies itself
        let points = (0..n)
            .map(|i| SparsePoint::new(vec![i as u32], vec![(i + 1) as f64 / n as f64]).unwrap())
            .collect();
        Arc::new(Dataset::new(n, points).unwrap())
    }

    fn ids(stream: &mut StreamSource, count: usize) -> Vec<u32> {
        (0..count)
            .map(|_| match stream.next_point() {
                PointRef::Sparse(p) => p.indices()[0],
                PointRef::Dense(_) => unreachable!(),
            })
            .collect()
    }

    #[test]
    fn dataset_pass_is_a_permutation() {
        let mut s = make_stream(Backing::Dataset(indexed_dataset(5)), 3).unwrap();
        for _ in 0..4 {
            let mut pass = ids(&mut s, 5);
            pass.sort_unstable();
            assert_eq!(pass, vec![0, 1, 2, 3, 4]);
        }
        assert_eq!(s.position(), 20);
    }

    #[test]
    fn same_seed_same_stream() {
        let data = indexed_dataset(50);
        let a = ids(&mut make_stream(Backing::Dataset(data.clone()), 9).unwrap(), 1000);
        let b = ids(&mut make_stream(Backing::Dataset(data), 9).unwrap(), 1000);
        assert_eq!(a, b);

        let spec = SyntheticSpec {
            d: 3,
            eigenvalues: vec![0.3, 0.2, 0.1],
            rotation_seed: Some(2),
            sampler: SamplerKind::SignVector,
        };
        let model = Arc::new(SyntheticModel::new(spec).unwrap());
        let mut s1 = make_stream(Backing::Synthetic(model.clone()), 4).unwrap();
        let mut s2 = make_stream(Backing::Synthetic(model), 4).unwrap();
        for _ in 0..1000 {
            let x = s1.next_point().to_dense(3);
            let y = s2.next_point().to_dense(3);
            assert_eq!(x, y);
        }
    }

    #[test]
    fn different_seeds_give_different_permutations() {
        // Two independent uniform permutations of 100 items coincide with
        // probability 1/100!, so every one of the 20 pairs should differ; the
        // threshold of 19 leaves room for nothing but a generator defect.
        let data = indexed_dataset(100);
        let differing = (0..20u64)
            .filter(|&i| {
                let a = ids(&mut make_stream(Backing::Dataset(data.clone()), 2 * i).unwrap(), 100);
                let b = ids(&mut make_stream(Backing::Dataset(data.clone()), 2 * i + 1).unwrap(), 100);
                a != b
            })
            .count();
        assert!(differing >= 19, "only {differing} of 20 pairs differ");
    }

    #[test]
    fn passes_are_reshuffled() {
        let mut s = make_stream(Backing::Dataset(indexed_dataset(30)), 1).unwrap();
        let first = ids(&mut s, 30);
        let second = ids(&mut s, 30);
        assert_ne!(first, second);
    }

    #[test]
    fn empty_dataset_is_rejected() {
        let empty = Arc::new(Dataset::new(4, Vec::new()).unwrap());
        assert!(matches!(
            make_stream(Backing::Dataset(empty), 0),
            Err(StreamError::InvalidArgument(_))
        ));
    }
}
