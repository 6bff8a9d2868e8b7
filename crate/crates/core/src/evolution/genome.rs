use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{HeadcountVector, ProblemInstance};
use crate::error::{Error, Result};

/// How integer decision variables are laid out in a genome.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Encoding {
    /// Bitstring; each variable is an offset from its lower bound.
    #[serde(rename = "BG")]
    Binary,
    /// One integer per variable.
    #[default]
    #[serde(rename = "RI")]
    Integer,
}

impl Encoding {
    pub fn label(self) -> &'static str {
        match self {
            Encoding::Binary => "BG",
            Encoding::Integer => "RI",
        }
    }

    pub fn from_label(s: &str) -> Option<Encoding> {
        match s.to_ascii_uppercase().as_str() {
            "BG" | "BINARY" => Some(Encoding::Binary),
            "RI" | "INTEGER" => Some(Encoding::Integer),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Genome {
    Binary(Vec<bool>),
    Integer(Vec<i64>),
}

impl Genome {
    pub fn encoding(&self) -> Encoding {
        match self {
            Genome::Binary(_) => Encoding::Binary,
            Genome::Integer(_) => Encoding::Integer,
        }
    }
}

/// Box of integer variables `lower[i] ..= upper[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneSpace {
    lower: Vec<i64>,
    upper: Vec<i64>,
    bits: Vec<usize>,
    offsets: Vec<usize>,
}

/// Bits needed to hold `0..=range`.
fn bits_for(range: u64) -> usize {
    (u64::BITS - range.leading_zeros()) as usize
}

impl GeneSpace {
    pub fn new(lower: Vec<i64>, upper: Vec<i64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::Structural(format!(
                "{} lower bounds but {} upper bounds",
                lower.len(),
                upper.len()
            )));
        }
        if let Some(i) = (0..lower.len()).find(|&i| lower[i] > upper[i]) {
            return Err(Error::Config(format!(
                "variable {i} has lower bound {} above upper bound {}",
                lower[i], upper[i]
            )));
        }
        let bits: Vec<usize> = lower.iter().zip(&upper).map(|(&l, &u)| bits_for((u - l) as u64)).collect();
        let offsets = bits
            .iter()
            .scan(0, |acc, &b| {
                let at = *acc;
                *acc += b;
                Some(at)
            })
            .collect();
        Ok(GeneSpace {
            lower,
            upper,
            bits,
            offsets,
        })
    }

    /// One variable per job, bounded by its headcount range.
    pub fn for_headcounts(inst: &ProblemInstance) -> Result<Self> {
        Self::new(
            inst.jobs.iter().map(|j| j.headcount_min as i64).collect(),
            inst.jobs.iter().map(|j| j.headcount_max as i64).collect(),
        )
    }

    /// `n` independent 0/1 variables.
    pub fn bits(n: usize) -> Self {
        Self::new(vec![0; n], vec![1; n]).expect("0 <= 1")
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn lower(&self) -> &[i64] {
        &self.lower
    }

    pub fn upper(&self) -> &[i64] {
        &self.upper
    }

    pub fn bits_per_gene(&self, i: usize) -> usize {
        self.bits[i]
    }

    pub fn total_bits(&self) -> usize {
        self.bits.iter().sum()
    }

    /// Number of points in the box.
    pub fn size(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(&l, &u)| (u - l + 1) as f64).product()
    }

    pub fn contains(&self, values: &[i64]) -> bool {
        values.len() == self.len() && (0..self.len()).all(|i| (self.lower[i]..=self.upper[i]).contains(&values[i]))
    }

    pub fn clamp(&self, values: &mut [i64]) {
        for (i, v) in values.iter_mut().enumerate() {
            *v = (*v).clamp(self.lower[i], self.upper[i]);
        }
    }

    pub fn check_genome(&self, g: &Genome) -> Result<()> {
        let (got, want) = match g {
            Genome::Binary(b) => (b.len(), self.total_bits()),
            Genome::Integer(v) => (v.len(), self.len()),
        };
        if got != want {
            return Err(Error::Structural(format!("genome has {got} genes, space needs {want}")));
        }
        Ok(())
    }

    /// Decodes to in-bound values; bit patterns past the upper bound clamp to it.
    pub fn decode(&self, g: &Genome) -> Vec<i64> {
        match g {
            Genome::Integer(v) => {
                let mut out = v.clone();
                self.clamp(&mut out);
                out
            }
            Genome::Binary(b) => (0..self.len())
                .map(|i| {
                    let seg = &b[self.offsets[i]..self.offsets[i] + self.bits[i]];
                    let raw = seg.iter().fold(0i64, |acc, &bit| (acc << 1) | bit as i64);
                    (self.lower[i] + raw).min(self.upper[i])
                })
                .collect(),
        }
    }

    /// Encodes `values`, clamping out-of-bound entries. The flag reports
    /// whether any clamping happened.
    pub fn encode(&self, values: &[i64], encoding: Encoding) -> Result<(Genome, bool)> {
        if values.len() != self.len() {
            return Err(Error::Structural(format!(
                "{} values for a space of {} variables",
                values.len(),
                self.len()
            )));
        }
        let mut v = values.to_vec();
        self.clamp(&mut v);
        let clamped = v != values;
        let g = match encoding {
            Encoding::Integer => Genome::Integer(v),
            Encoding::Binary => {
                let mut bits = Vec::with_capacity(self.total_bits());
                for (i, &x) in v.iter().enumerate() {
                    let raw = (x - self.lower[i]) as u64;
                    for k in (0..self.bits[i]).rev() {
                        bits.push((raw >> k) & 1 == 1);
                    }
                }
                Genome::Binary(bits)
            }
        };
        Ok((g, clamped))
    }

    pub fn random<R: Rng>(&self, encoding: Encoding, rng: &mut R) -> Genome {
        match encoding {
            Encoding::Integer => Genome::Integer(
                (0..self.len())
                    .map(|i| rng.gen_range(self.lower[i]..=self.upper[i]))
                    .collect(),
            ),
            Encoding::Binary => Genome::Binary((0..self.total_bits()).map(|_| rng.gen_bool(0.5)).collect()),
        }
    }

    /// Single-point crossover on bitstrings; per-gene blend
    /// `round(l*a + (1-l)*b)` with uniform `l` on integer vectors, the second
    /// child taking the complement `a + b - c1`.
    pub fn crossover<R: Rng>(&self, a: &Genome, b: &Genome, rng: &mut R) -> (Genome, Genome) {
        match (a, b) {
            (Genome::Binary(x), Genome::Binary(y)) => {
                if x.len() < 2 {
                    return (a.clone(), b.clone());
                }
                let cut = rng.gen_range(1..x.len());
                let mut c1 = x[..cut].to_vec();
                c1.extend_from_slice(&y[cut..]);
                let mut c2 = y[..cut].to_vec();
                c2.extend_from_slice(&x[cut..]);
                (Genome::Binary(c1), Genome::Binary(c2))
            }
            (Genome::Integer(x), Genome::Integer(y)) => {
                let mut c1 = Vec::with_capacity(x.len());
                let mut c2 = Vec::with_capacity(x.len());
                for (&p, &q) in x.iter().zip(y) {
                    let l: f64 = rng.gen();
                    let v = (l * p as f64 + (1.0 - l) * q as f64).round() as i64;
                    c1.push(v);
                    c2.push(p + q - v);
                }
                (Genome::Integer(c1), Genome::Integer(c2))
            }
            _ => panic!("crossover of genomes with different encodings"),
        }
    }

    /// Each variable mutates with probability `rate`. Bitstrings flip each
    /// bit of a variable's segment with probability `rate / bits`, integers
    /// are reset uniformly within bounds.
    pub fn mutate<R: Rng>(&self, g: &mut Genome, rate: f64, rng: &mut R) {
        match g {
            Genome::Binary(bits) => {
                for i in 0..self.len() {
                    let p = rate / self.bits[i] as f64;
                    for bit in &mut bits[self.offsets[i]..self.offsets[i] + self.bits[i]] {
                        if rng.gen_bool(p) {
                            *bit = !*bit;
                        }
                    }
                }
            }
            Genome::Integer(v) => {
                for (i, x) in v.iter_mut().enumerate() {
                    if rng.gen_bool(rate) {
                        *x = rng.gen_range(self.lower[i]..=self.upper[i]);
                    }
                }
            }
        }
    }
}

/// Encodes a headcount vector over the instance's headcount box.
pub fn encode(hc: &HeadcountVector, inst: &ProblemInstance, encoding: Encoding) -> Result<(Genome, bool)> {
    hc.check_against(inst)?;
    let values: Vec<i64> = hc.counts().iter().map(|&n| n as i64).collect();
    GeneSpace::for_headcounts(inst)?.encode(&values, encoding)
}

pub fn decode(g: &Genome, inst: &ProblemInstance) -> Result<HeadcountVector> {
    let space = GeneSpace::for_headcounts(inst)?;
    space.check_genome(g)?;
    Ok(HeadcountVector(space.decode(g).into_iter().map(|v| v as u32).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::reference_like;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn segment_lengths() {
        let s = GeneSpace::new(vec![0, 2, 5, 1], vec![0, 3, 12, 9]).unwrap();
        // ranges 0, 1, 7, 8 -> ceil(log2(range + 1))
        assert_eq!((0..4).map(|i| s.bits_per_gene(i)).collect::<Vec<_>>(), vec![0, 1, 3, 4]);
        assert_eq!(s.total_bits(), 8);
        for range in 0u64..300 {
            assert_eq!(bits_for(range), ((range + 1) as f64).log2().ceil() as usize, "{range}");
        }
    }

    #[test]
    fn fig6_counts_round_trip() {
        let inst = reference_like();
        let hc = HeadcountVector(vec![3, 10, 4, 8, 7, 8]);
        for enc in [Encoding::Binary, Encoding::Integer] {
            let (g, clamped) = encode(&hc, &inst, enc).unwrap();
            assert!(!clamped);
            assert_eq!(decode(&g, &inst).unwrap(), hc);
        }
    }

    #[test]
    fn lower_bounds_encode_to_zero_bits() {
        let inst = reference_like();
        let hc = HeadcountVector(inst.lower_bounds());
        let (g, _) = encode(&hc, &inst, Encoding::Binary).unwrap();
        assert!(matches!(g, Genome::Binary(b) if b.iter().all(|&x| !x)));
    }

    #[test]
    fn out_of_bound_counts_clamp_and_flag() {
        let inst = reference_like();
        let hc = HeadcountVector(vec![0, 10, 4, 99, 7, 8]);
        let (g, clamped) = encode(&hc, &inst, Encoding::Integer).unwrap();
        assert!(clamped);
        let back = decode(&g, &inst).unwrap();
        assert_eq!(back.0[0], inst.jobs[0].headcount_min);
        assert_eq!(back.0[3], inst.jobs[3].headcount_max);
    }

    #[test]
    fn overflowing_bit_patterns_clamp() {
        let s = GeneSpace::new(vec![1], vec![5]).unwrap();
        assert_eq!(s.decode(&Genome::Binary(vec![true, true, true])), vec![5]);
    }

    #[test]
    fn encodings_share_decode_image() {
        let s = GeneSpace::new(vec![1, 0], vec![4, 2]).unwrap();
        let mut bg = std::collections::BTreeSet::new();
        for mask in 0u32..(1 << s.total_bits()) {
            let bits = (0..s.total_bits()).map(|k| mask >> k & 1 == 1).collect();
            bg.insert(s.decode(&Genome::Binary(bits)));
        }
        let mut ri = std::collections::BTreeSet::new();
        for a in -3..8 {
            for b in -3..6 {
                ri.insert(s.decode(&Genome::Integer(vec![a, b])));
            }
        }
        assert_eq!(bg, ri);
        assert_eq!(bg.len(), 12);
    }

    #[test]
    fn operators_stay_in_bounds() {
        let s = GeneSpace::new(vec![1, 0, 4], vec![6, 3, 4]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for enc in [Encoding::Binary, Encoding::Integer] {
            for _ in 0..500 {
                let a = s.random(enc, &mut rng);
                let b = s.random(enc, &mut rng);
                let (mut c, d) = s.crossover(&a, &b, &mut rng);
                s.mutate(&mut c, 0.5, &mut rng);
                s.check_genome(&c).unwrap();
                s.check_genome(&d).unwrap();
                assert!(s.contains(&s.decode(&c)));
                if enc == Encoding::Integer {
                    assert!(matches!(&d, Genome::Integer(v) if s.contains(v)));
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn round_trip_identity(
            spans in proptest::collection::vec((0i64..20, 0i64..40), 1..8),
            picks in proptest::collection::vec(0.0f64..1.0, 8),
        ) {
            let lower: Vec<i64> = spans.iter().map(|s| s.0).collect();
            let upper: Vec<i64> = spans.iter().map(|s| s.0 + s.1).collect();
            let space = GeneSpace::new(lower.clone(), upper).unwrap();
            let values: Vec<i64> = spans
                .iter()
                .zip(&picks)
                .map(|(s, p)| s.0 + (p * (s.1 + 1) as f64).floor().min(s.1 as f64) as i64)
                .collect();
            for enc in [Encoding::Binary, Encoding::Integer] {
                let (g, clamped) = space.encode(&values, enc).unwrap();
                prop_assert!(!clamped);
                prop_assert_eq!(space.decode(&g), values.clone());
            }
        }
    }
}
