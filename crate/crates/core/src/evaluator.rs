//! Agreement between predicted and gold labels: confusion matrix, percentage
//! agreement, Cohen's kappa with Landis–Koch bands and per-class recall.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::{SentimentLabel, Shares};
use crate::error::{Error, Result};

/// Counts indexed `[gold][predicted]` in [`SentimentLabel::ALL`] order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    counts: [[u64; 3]; 3],
}

impl ConfusionMatrix {
    pub fn from_counts(counts: [[u64; 3]; 3]) -> Self {
        ConfusionMatrix { counts }
    }

    pub fn counts(&self) -> &[[u64; 3]; 3] {
        &self.counts
    }

    pub fn get(&self, gold: SentimentLabel, predicted: SentimentLabel) -> u64 {
        self.counts[gold.index()][predicted.index()]
    }

    pub fn add(&mut self, gold: SentimentLabel, predicted: SentimentLabel) {
        self.counts[gold.index()][predicted.index()] += 1;
    }

    pub fn n(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..3).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sums(&self) -> [u64; 3] {
        std::array::from_fn(|r| self.counts[r].iter().sum())
    }

    pub fn col_sums(&self) -> [u64; 3] {
        std::array::from_fn(|c| self.counts.iter().map(|row| row[c]).sum())
    }

    /// Cellwise sum, for merging partial matrices.
    pub fn merge(&self, other: &ConfusionMatrix) -> ConfusionMatrix {
        ConfusionMatrix {
            counts: std::array::from_fn(|r| std::array::from_fn(|c| self.counts[r][c] + other.counts[r][c])),
        }
    }

    /// Numerator of chance agreement: `sum_c rowsum_c * colsum_c`, over `n^2`.
    fn chance_numerator(&self) -> u128 {
        let rows = self.row_sums();
        let cols = self.col_sums();
        (0..3).map(|c| u128::from(rows[c]) * u128::from(cols[c])).sum()
    }

    /// Expected chance agreement p_e.
    pub fn chance_agreement(&self) -> Result<f64> {
        let n = self.n();
        if n == 0 {
            return Err(Error::NoLabels);
        }
        Ok(self.chance_numerator() as f64 / (u128::from(n) * u128::from(n)) as f64)
    }
}

pub fn confusion(gold: &[SentimentLabel], predicted: &[SentimentLabel]) -> Result<ConfusionMatrix> {
    if gold.len() != predicted.len() {
        return Err(Error::Alignment(format!(
            "{} gold labels vs {} predictions",
            gold.len(),
            predicted.len()
        )));
    }
    if gold.is_empty() {
        return Err(Error::NoLabels);
    }
    let mut m = ConfusionMatrix::default();
    for (&g, &p) in gold.iter().zip(predicted) {
        m.add(g, p);
    }
    Ok(m)
}

/// Aligns `(id, label)` predictions to `(id, label)` gold pairs by position,
/// requiring identical ids.
pub fn confusion_by_id<'a>(
    gold: impl IntoIterator<Item = (&'a str, SentimentLabel)>,
    predicted: impl IntoIterator<Item = (&'a str, SentimentLabel)>,
) -> Result<ConfusionMatrix> {
    let gold: Vec<_> = gold.into_iter().collect();
    let predicted: Vec<_> = predicted.into_iter().collect();
    if gold.len() != predicted.len() {
        return Err(Error::Alignment(format!(
            "{} gold labels vs {} predictions",
            gold.len(),
            predicted.len()
        )));
    }
    for ((gid, _), (pid, _)) in gold.iter().zip(&predicted) {
        if gid != pid {
            return Err(Error::Alignment(format!(
                "gold id {gid:?} paired with prediction id {pid:?}"
            )));
        }
    }
    let g: Vec<_> = gold.iter().map(|&(_, l)| l).collect();
    let p: Vec<_> = predicted.iter().map(|&(_, l)| l).collect();
    confusion(&g, &p)
}

pub fn percent_agreement(m: &ConfusionMatrix) -> Result<f64> {
    let n = m.n();
    if n == 0 {
        return Err(Error::NoLabels);
    }
    Ok(100.0 * m.trace() as f64 / n as f64)
}

/// Cohen's kappa, `(p_o - p_e) / (1 - p_e)`.
///
/// Computed as `(trace*n - sum_c row_c*col_c) / (n^2 - sum_c row_c*col_c)` in
/// integers so that chance-level matrices give exactly 0.
pub fn cohens_kappa(m: &ConfusionMatrix) -> Result<f64> {
    let n = u128::from(m.n());
    if n == 0 {
        return Err(Error::NoLabels);
    }
    let chance = m.chance_numerator();
    let denom = n * n - chance;
    if denom == 0 {
        return Err(Error::DegenerateMarginals);
    }
    let observed = u128::from(m.trace()) * n;
    let numer = observed as f64 - chance as f64;
    Ok(numer / denom as f64)
}

/// Landis–Koch interpretation of kappa.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KappaBand {
    #[serde(rename = "poor")]
    Poor,
    #[serde(rename = "slight")]
    Slight,
    #[serde(rename = "fair")]
    Fair,
    #[serde(rename = "moderate")]
    Moderate,
    #[serde(rename = "substantial")]
    Substantial,
    #[serde(rename = "almost perfect")]
    AlmostPerfect,
}

impl KappaBand {
    pub fn as_str(self) -> &'static str {
        match self {
            KappaBand::Poor => "poor",
            KappaBand::Slight => "slight",
            KappaBand::Fair => "fair",
            KappaBand::Moderate => "moderate",
            KappaBand::Substantial => "substantial",
            KappaBand::AlmostPerfect => "almost perfect",
        }
    }
}

impl fmt::Display for KappaBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn kappa_band(kappa: f64) -> Result<KappaBand> {
    if !(-1.0..=1.0).contains(&kappa) {
        return Err(Error::KappaOutOfRange(kappa));
    }
    Ok(match kappa {
        k if k <= 0.0 => KappaBand::Poor,
        k if k <= 0.20 => KappaBand::Slight,
        k if k <= 0.40 => KappaBand::Fair,
        k if k <= 0.60 => KappaBand::Moderate,
        k if k <= 0.80 => KappaBand::Substantial,
        _ => KappaBand::AlmostPerfect,
    })
}

/// Recall per gold class in percent; `None` where the class has no gold items.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassRecall {
    pub positive: Option<f64>,
    pub negative: Option<f64>,
    pub neutral: Option<f64>,
}

impl ClassRecall {
    pub fn get(&self, label: SentimentLabel) -> Option<f64> {
        match label {
            SentimentLabel::Positive => self.positive,
            SentimentLabel::Negative => self.negative,
            SentimentLabel::Neutral => self.neutral,
        }
    }
}

pub fn per_class_recall(m: &ConfusionMatrix) -> ClassRecall {
    let rows = m.row_sums();
    let recall = |l: SentimentLabel| {
        let i = l.index();
        (rows[i] > 0).then(|| 100.0 * m.counts[i][i] as f64 / rows[i] as f64)
    };
    ClassRecall {
        positive: recall(SentimentLabel::Positive),
        negative: recall(SentimentLabel::Negative),
        neutral: recall(SentimentLabel::Neutral),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: u64,
    pub shares_predicted: Shares,
    pub percent_agreement: f64,
    pub kappa: f64,
    pub band: KappaBand,
    pub per_class_recall: ClassRecall,
    pub confusion: ConfusionMatrix,
}

impl EvalReport {
    pub fn from_matrix(m: ConfusionMatrix) -> Result<Self> {
        let kappa = cohens_kappa(&m)?;
        Ok(EvalReport {
            n: m.n(),
            shares_predicted: Shares::from_counts(m.col_sums()),
            percent_agreement: percent_agreement(&m)?,
            kappa,
            band: kappa_band(kappa)?,
            per_class_recall: per_class_recall(&m),
            confusion: m,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn build_report(gold: &[SentimentLabel], predicted: &[SentimentLabel]) -> Result<EvalReport> {
    EvalReport::from_matrix(confusion(gold, predicted)?)
}

/// One line of a results table: label shares and, except for reference rows,
/// agreement with gold.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub name: String,
    pub shares: Shares,
    pub agreement: Option<(f64, f64)>,
}

impl TableRow {
    pub fn reference(name: impl Into<String>, shares: Shares) -> Self {
        TableRow {
            name: name.into(),
            shares,
            agreement: None,
        }
    }

    pub fn evaluated(name: impl Into<String>, report: &EvalReport) -> Self {
        TableRow {
            name: name.into(),
            shares: report.shares_predicted,
            agreement: Some((report.percent_agreement, report.kappa)),
        }
    }
}

/// Aligned plain-text table with columns `+ - n % kappa`.
pub fn render_table(rows: &[TableRow]) -> String {
    let name_w = rows.iter().map(|r| r.name.chars().count()).max().unwrap_or(0).max(9);
    let mut out = format!(
        "{:<name_w$}  {:>6} {:>6} {:>6}  {:>6} {:>6}\n",
        "condition", "+", "-", "n", "%", "kappa"
    );
    for r in rows {
        let (agree, kappa) = match r.agreement {
            Some((a, k)) => (format!("{a:.1}"), format!("{k:.2}")),
            None => (String::new(), "n/a".to_string()),
        };
        out.push_str(&format!(
            "{:<name_w$}  {:>6.1} {:>6.1} {:>6.1}  {:>6} {:>6}\n",
            r.name, r.shares.positive, r.shares.negative, r.shares.neutral, agree, kappa
        ));
    }
    out
}
