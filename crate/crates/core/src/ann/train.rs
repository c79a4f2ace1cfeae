use std::collections::BTreeMap;

use super::network::Network;
use super::{classify, AnnError, Classification, Decision, DecisionConfig};
use crate::sensor::ObstacleBits;
use crate::Scalar;

/// Target activation for the hot class (`-TARGET_MAGNITUDE` for the others).
pub const TARGET_MAGNITUDE: f64 = 0.9;

/// Labelled obstacle-bit patterns.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    rows: Vec<(ObstacleBits, Decision)>,
}

impl TrainingSet {
    pub fn new(rows: Vec<(ObstacleBits, Decision)>) -> Result<Self, AnnError> {
        let mut seen = BTreeMap::new();
        for (bits, d) in &rows {
            if let Some(prev) = seen.insert(*bits, *d) {
                if prev != *d {
                    return Err(AnnError::ConflictingTargets(*bits));
                }
            }
        }
        Ok(Self { rows })
    }

    /// The 14-row decision table: inputs X1..X5 and the motion each should produce.
    pub fn decision_table() -> Self {
        use Decision::*;
        let rows = [
            ("11011", Straight),
            ("10011", Straight),
            ("11001", Straight),
            ("10001", Straight),
            ("00000", Straight),
            ("01111", Left),
            ("00111", Left),
            ("01101", Left),
            ("00101", Left),
            ("11110", Right),
            ("11100", Right),
            ("10110", Right),
            ("10100", Right),
            ("11111", Stop),
        ];
        Self::new(rows.iter().map(|(b, d)| (b.parse().unwrap(), *d)).collect()).unwrap()
    }

    /// One `b1 b2 b3 b4 b5 label` row per line (bits may also be written as `11011`).
    /// `#` comments and an optional leading `DATA1` tag are allowed.
    pub fn parse(text: &str) -> Result<Self, AnnError> {
        let mut rows = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() || (rows.is_empty() && content == "DATA1") {
                continue;
            }
            let (bits, label) = content
                .rsplit_once(char::is_whitespace)
                .ok_or_else(|| AnnError::Parse { line, msg: "expected 5 bits followed by a label".into() })?;
            let bits: ObstacleBits = bits.parse().map_err(|msg| AnnError::Parse { line, msg })?;
            let d: Decision = label.parse().map_err(|msg| AnnError::Parse { line, msg })?;
            rows.push((bits, d));
        }
        Self::new(rows)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("DATA1\n");
        for (bits, d) in &self.rows {
            let spaced: Vec<String> = bits.to_string().chars().map(String::from).collect();
            out.push_str(&format!("{} {}\n", spaced.join(" "), d));
        }
        out
    }

    pub fn rows(&self) -> &[(ObstacleBits, Decision)] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Relabels every row: class `k` becomes class `perm[k]` (indices into [`Decision::ALL`]).
    pub fn relabel(&self, perm: [usize; 4]) -> Self {
        Self { rows: self.rows.iter().map(|(b, d)| (*b, Decision::ALL[perm[d.index()]])).collect() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparams<T> {
    pub learning_rate: T,
    pub max_epochs: u32,
    /// Training stops once the batch sse drops to this value.
    pub target_error: T,
    pub seed: u64,
    pub init_scale: T,
    pub hidden: usize,
}

impl<T: Scalar> Default for Hyperparams<T> {
    fn default() -> Self {
        Self {
            learning_rate: T::lit(0.1),
            max_epochs: 50_000,
            target_error: T::lit(0.01),
            seed: 42,
            init_scale: T::lit(0.5),
            hidden: 5,
        }
    }
}

impl<T: Scalar> Hyperparams<T> {
    pub fn validate(&self) -> Result<(), AnnError> {
        if !(self.learning_rate > T::zero() && self.learning_rate.is_finite()) {
            return Err(AnnError::Hyperparams("learning_rate must be positive"));
        }
        if !(self.init_scale > T::zero() && self.init_scale.is_finite()) {
            return Err(AnnError::Hyperparams("init_scale must be positive"));
        }
        if self.target_error.is_nan() || self.target_error < T::zero() {
            return Err(AnnError::Hyperparams("target_error must be non-negative"));
        }
        if self.max_epochs == 0 {
            return Err(AnnError::Hyperparams("max_epochs must be positive"));
        }
        if self.hidden == 0 {
            return Err(AnnError::Hyperparams("hidden must be positive"));
        }
        Ok(())
    }

    /// `key value` pairs, in the order written to weight file headers.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("learning_rate", self.learning_rate.to_string()),
            ("max_epochs", self.max_epochs.to_string()),
            ("target_error", self.target_error.to_string()),
            ("seed", self.seed.to_string()),
            ("init_scale", self.init_scale.to_string()),
            ("hidden", self.hidden.to_string()),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trained<T> {
    pub network: Network<T>,
    pub epochs: u32,
    pub sse: T,
    /// False when `max_epochs` ran out before the sse target even though
    /// every row is classified correctly.
    pub reached_target: bool,
}

/// Trains from the seeded random initialization described by `hp`.
pub fn train<T: Scalar>(data: &TrainingSet, hp: &Hyperparams<T>) -> Result<Trained<T>, AnnError> {
    hp.validate()?;
    train_from(Network::random(hp.hidden, hp.init_scale, hp.seed), data, hp)
}

/// Full-batch gradient descent from `initial` until the sse reaches
/// `hp.target_error` or `hp.max_epochs` updates have been applied.
///
/// The result is only returned when every row classifies to its label at
/// the default activation threshold; otherwise the run is reported as
/// [`AnnError::NonConvergence`].
pub fn train_from<T: Scalar>(
    initial: Network<T>,
    data: &TrainingSet,
    hp: &Hyperparams<T>,
) -> Result<Trained<T>, AnnError> {
    hp.validate()?;
    if data.is_empty() {
        return Err(AnnError::EmptyTrainingSet);
    }
    let mut net = initial;
    let mut epochs = 0;
    let mut reached_target = false;
    let sse = loop {
        if epochs == hp.max_epochs {
            break net.sse(data);
        }
        let (next, sse) = net.backprop_step(data, hp.learning_rate);
        if sse <= hp.target_error {
            reached_target = true;
            break sse;
        }
        net = next;
        epochs += 1;
        if epochs % 10_000 == 0 {
            log::debug!("epoch {epochs}: sse {sse}");
        }
    };

    let cfg = DecisionConfig::default();
    let failing: Vec<String> = data
        .rows()
        .iter()
        .filter(|(bits, d)| classify(&net, *bits, &cfg) != Classification::Decided(*d))
        .map(|(bits, d)| format!("{bits}→{d}"))
        .collect();
    if !failing.is_empty() {
        return Err(AnnError::NonConvergence { epochs, sse: sse.to_f64_lossy(), failing: failing.join(", ") });
    }
    Ok(Trained { network: net, epochs, sse, reached_target })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_has_fourteen_distinct_rows() {
        let t = TrainingSet::decision_table();
        assert_eq!(t.len(), 14);
        let counts = Decision::ALL.map(|d| t.rows().iter().filter(|(_, r)| *r == d).count());
        assert_eq!(counts, [5, 4, 4, 1]);
    }

    #[test]
    fn conflicting_rows_rejected() {
        let b: ObstacleBits = "10101".parse().unwrap();
        assert_eq!(
            TrainingSet::new(vec![(b, Decision::Left), (b, Decision::Right)]),
            Err(AnnError::ConflictingTargets(b))
        );
        assert!(TrainingSet::new(vec![(b, Decision::Left), (b, Decision::Left)]).is_ok());
    }

    #[test]
    fn dataset_text_round_trip() {
        let t = TrainingSet::decision_table();
        assert_eq!(TrainingSet::parse(&t.to_text()).unwrap(), t);
        let parsed = TrainingSet::parse("# x\n11111 no-movement\n0 0 0 0 0 Straight\n").unwrap();
        assert_eq!(parsed.rows()[0].1, Decision::Stop);
        assert!(matches!(TrainingSet::parse("1 1 1 stop\n"), Err(AnnError::Parse { line: 1, .. })));
        assert!(matches!(TrainingSet::parse("\n11111 hover\n"), Err(AnnError::Parse { line: 2, .. })));
    }

    #[test]
    fn sse_decreases_over_first_ten_epochs() {
        let data = TrainingSet::decision_table();
        let hp = Hyperparams::<f64>::default();
        let mut net = Network::random(hp.hidden, hp.init_scale, hp.seed);
        let mut history = Vec::new();
        for _ in 0..11 {
            let (next, sse) = net.backprop_step(&data, hp.learning_rate);
            history.push(sse);
            net = next;
        }
        assert!(history.windows(2).all(|w| w[1] < w[0]), "{history:?}");
    }

    #[test]
    fn trains_table_with_defaults() {
        let data = TrainingSet::decision_table();
        let trained = train(&data, &Hyperparams::<f64>::default()).unwrap();
        let cfg = DecisionConfig::default();
        for (bits, d) in data.rows() {
            assert_eq!(classify(&trained.network, *bits, &cfg), Classification::Decided(*d), "{bits}");
        }
    }

    #[test]
    fn single_row_converges_quickly() {
        let data = TrainingSet::new(vec![("10101".parse().unwrap(), Decision::Right)]).unwrap();
        let trained = train(&data, &Hyperparams::<f64>::default()).unwrap();
        assert!(trained.reached_target);
        assert!(trained.epochs < 200, "{}", trained.epochs);
    }

    #[test]
    fn same_seed_same_network() {
        let data = TrainingSet::decision_table();
        let hp = Hyperparams::<f64>::default();
        assert_eq!(train(&data, &hp).unwrap(), train(&data, &hp).unwrap());
    }

    #[test]
    fn exhausted_budget_reports_non_convergence() {
        let hp = Hyperparams::<f64> { max_epochs: 3, ..Hyperparams::default() };
        assert!(matches!(train(&TrainingSet::decision_table(), &hp), Err(AnnError::NonConvergence { epochs: 3, .. })));
    }

    #[test]
    fn empty_and_invalid_inputs() {
        let empty = TrainingSet::new(vec![]).unwrap();
        assert_eq!(train(&empty, &Hyperparams::<f64>::default()), Err(AnnError::EmptyTrainingSet));
        let hp = Hyperparams::<f64> { learning_rate: 0.0, ..Hyperparams::default() };
        assert!(matches!(train(&TrainingSet::decision_table(), &hp), Err(AnnError::Hyperparams(_))));
    }

    #[test]
    fn label_permutation_commutes_with_training() {
        let data = TrainingSet::decision_table();
        let hp = Hyperparams::<f64>::default();
        let init = Network::random(hp.hidden, hp.init_scale, hp.seed);
        let base = train_from(init.clone(), &data, &hp).unwrap().network;

        // Class k trains on output perm[k]; permuting the initial output layer the
        // same way makes the two runs the same problem.
        let perm = [2, 3, 0, 1];
        let mut inverse = [0; 4];
        for (k, p) in perm.iter().enumerate() {
            inverse[*p] = k;
        }
        let permuted_init = init.permute_outputs(inverse);
        let permuted = train_from(permuted_init, &data.relabel(perm), &hp).unwrap().network;
        let restored = permuted.permute_outputs(perm);

        let cfg = DecisionConfig::default();
        for bits in ObstacleBits::all() {
            assert_eq!(classify(&base, bits, &cfg), classify(&restored, bits, &cfg), "{bits}");
        }
    }
}
