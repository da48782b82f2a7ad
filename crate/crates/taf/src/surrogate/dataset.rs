//! Parameter/metric datasets: uniform random sampling labeled by the
//! synthetic circuit evaluator, and the CSV interchange format
//! (ten parameter columns followed by the two metric columns).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sim::synth::{
    CircuitParams, EvalVariant, SynthEval, NUM_METRICS, NUM_PARAMS, PARAM_NAMES,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.first().map(|r| r.len()).unwrap_or(0)
    }

    pub fn output_dim(&self) -> usize {
        self.targets.first().map(|r| r.len()).unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.inputs.is_empty() {
            return Err(Error::InvalidSpec("dataset is empty".into()));
        }
        if self.inputs.len() != self.targets.len() {
            return Err(Error::InvalidSpec(
                "dataset inputs/targets length mismatch".into(),
            ));
        }
        let in_dim = self.input_dim();
        let out_dim = self.output_dim();
        if self.inputs.iter().any(|r| r.len() != in_dim)
            || self.targets.iter().any(|r| r.len() != out_dim)
        {
            return Err(Error::InvalidSpec("ragged dataset rows".into()));
        }
        Ok(())
    }

    /// CSV with named parameter and metric columns. An optional comment
    /// prefix (provenance) may precede the header row.
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "{},power_mw,sfdr_db", PARAM_NAMES.join(","))?;
        for (x, y) in self.inputs.iter().zip(&self.targets) {
            let mut row = String::new();
            for v in x {
                row.push_str(&format!("{v},"));
            }
            row.push_str(&format!("{},{}", y[0], y[1]));
            writeln!(w, "{row}")?;
        }
        Ok(())
    }

    /// Parses the CSV format written by [`Dataset::write_csv`], skipping
    /// `#` comment lines.
    pub fn parse_csv(text: &str) -> Result<Dataset> {
        let mut inputs = Vec::new();
        let mut targets = Vec::new();
        let mut saw_header = false;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !saw_header {
                saw_header = true; // column names
                continue;
            }
            let fields: Vec<f64> = line
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("line {}: bad value '{v}'", lineno + 1)))
                })
                .collect::<Result<Vec<f64>>>()?;
            if fields.len() != NUM_PARAMS + NUM_METRICS {
                return Err(Error::Parse(format!(
                    "line {}: expected {} columns, found {}",
                    lineno + 1,
                    NUM_PARAMS + NUM_METRICS,
                    fields.len()
                )));
            }
            inputs.push(fields[..NUM_PARAMS].to_vec());
            targets.push(fields[NUM_PARAMS..].to_vec());
        }
        let dataset = Dataset { inputs, targets };
        dataset.validate()?;
        Ok(dataset)
    }

    pub fn read_csv(path: &std::path::Path) -> Result<Dataset> {
        Self::parse_csv(&std::fs::read_to_string(path)?)
    }
}

/// Draws `n` i.i.d. uniform parameter vectors over the evaluator's ranges and
/// labels them with the selected variant. Deterministic per seed.
pub fn sample_dataset(
    n: usize,
    variant: EvalVariant,
    seed: u64,
    eval: &SynthEval,
) -> Result<Dataset> {
    if n < 1 {
        return Err(Error::InvalidSpec("dataset size must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inputs = Vec::with_capacity(n);
    let mut targets = Vec::with_capacity(n);
    for _ in 0..n {
        let mut p = [0.0; NUM_PARAMS];
        for (i, v) in p.iter_mut().enumerate() {
            let (lo, hi) = eval.ranges.0[i];
            *v = rng.random_range(lo..=hi);
        }
        let metrics = eval.eval(&CircuitParams(p), variant)?;
        inputs.push(p.to_vec());
        targets.push(vec![metrics.power_mw, metrics.sfdr_db]);
    }
    Ok(Dataset { inputs, targets })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sample_is_in_range() {
        let eval = SynthEval::default();
        let d = sample_dataset(1, EvalVariant::Schematic, 0, &eval).unwrap();
        assert_eq!(d.len(), 1);
        for (i, &(lo, hi)) in eval.ranges.0.iter().enumerate() {
            assert!(d.inputs[0][i] >= lo && d.inputs[0][i] <= hi);
        }
    }

    #[test]
    fn same_seed_reproduces_dataset() {
        let eval = SynthEval::default();
        let a = sample_dataset(50, EvalVariant::Postlayout, 9, &eval).unwrap();
        let b = sample_dataset(50, EvalVariant::Postlayout, 9, &eval).unwrap();
        assert_eq!(a, b);
        let c = sample_dataset(50, EvalVariant::Postlayout, 10, &eval).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn csv_round_trip() {
        let eval = SynthEval::default();
        let d = sample_dataset(20, EvalVariant::Schematic, 3, &eval).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let back = Dataset::parse_csv(&text).unwrap();
        assert_eq!(d, back);
        assert!(Dataset::parse_csv("a,b\n1,2\n").is_err());
    }

    #[test]
    fn large_sampling_budget_is_fast() {
        // The reference desk budget: 5500 labeled samples in well under 10 s.
        let eval = SynthEval::default();
        let start = std::time::Instant::now();
        let d = sample_dataset(5500, EvalVariant::Schematic, 1, &eval).unwrap();
        assert_eq!(d.len(), 5500);
        assert!(
            start.elapsed().as_secs_f64() < 10.0,
            "sampling took {:?}",
            start.elapsed()
        );
    }
}
