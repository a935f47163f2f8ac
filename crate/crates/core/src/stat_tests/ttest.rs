use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Variance assumption of the two-sample t-test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TTestKind {
    /// Unequal variances, Welch–Satterthwaite degrees of freedom.
    #[default]
    Welch,
    /// Pooled variance, `n1 + n2 - 2` degrees of freedom.
    Student,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub statistic: f64,
    pub p_value: f64,
    pub df: f64,
    pub n1: usize,
    pub n2: usize,
    pub method: TTestKind,
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v)
}

/// Two-sided two-sample t-test of equal means.
///
/// Returns `None` when a group has fewer than two observations or the
/// standard error is zero.
pub fn t_test(a: &[f64], b: &[f64], kind: TTestKind) -> Option<TestReport> {
    let (n1, n2) = (a.len(), b.len());
    if n1 < 2 || n2 < 2 {
        return None;
    }
    let (m1, v1) = mean_var(a);
    let (m2, v2) = mean_var(b);
    let (f1, f2) = (n1 as f64, n2 as f64);
    let (se2, df) = match kind {
        TTestKind::Welch => {
            let (q1, q2) = (v1 / f1, v2 / f2);
            let se2 = q1 + q2;
            (
                se2,
                se2 * se2 / (q1 * q1 / (f1 - 1.0) + q2 * q2 / (f2 - 1.0)),
            )
        }
        TTestKind::Student => {
            let df = f1 + f2 - 2.0;
            let pooled = ((f1 - 1.0) * v1 + (f2 - 1.0) * v2) / df;
            (pooled * (1.0 / f1 + 1.0 / f2), df)
        }
    };
    if !(se2 > 0.0) || !df.is_finite() {
        return None;
    }
    let t = (m1 - m2) / se2.sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).ok()?;
    let p = (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0);
    Some(TestReport {
        statistic: t,
        p_value: p,
        df,
        n1,
        n2,
        method: kind,
    })
}

/// Pairwise p-values between groups; symmetric with a unit diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqualMeansMatrix {
    pub labels: Vec<String>,
    /// `None` marks an untestable pair.
    pub p_values: Vec<Vec<Option<f64>>>,
    pub method: TTestKind,
}

impl EqualMeansMatrix {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Table 2 convention: `*` below 1%, `**` below 5%.
    pub fn stars(p: f64) -> &'static str {
        if p < 0.01 {
            "*"
        } else if p < 0.05 {
            "**"
        } else {
            ""
        }
    }

    /// Number of distinct off-diagonal pairs with a p-value below `alpha`.
    pub fn n_rejected(&self, alpha: f64) -> usize {
        let n = self.len();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| matches!(self.p_values[i][j], Some(p) if p < alpha))
            .count()
    }

    /// CSV with a header row of labels; cells are `p` plus stars, or `NA`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("group");
        for l in &self.labels {
            let _ = write!(s, ",{l}");
        }
        s.push('\n');
        for (i, row) in self.p_values.iter().enumerate() {
            s.push_str(&self.labels[i]);
            for p in row {
                match p {
                    Some(p) => {
                        let _ = write!(s, ",{p:.11e}{}", Self::stars(*p));
                    }
                    None => s.push_str(",NA"),
                }
            }
            s.push('\n');
        }
        s
    }
}

pub fn equal_means_matrix(groups: &[(String, Vec<f64>)], kind: TTestKind) -> EqualMeansMatrix {
    let n = groups.len();
    let mut p = vec![vec![None; n]; n];
    let mut untestable = 0;
    for i in 0..n {
        p[i][i] = Some(1.0);
        for j in i + 1..n {
            let r = t_test(&groups[i].1, &groups[j].1, kind).map(|r| r.p_value);
            untestable += usize::from(r.is_none());
            p[i][j] = r;
            p[j][i] = r;
        }
    }
    if untestable > 0 {
        log::warn!(
            "{untestable} of {} group pairs are untestable",
            n * n.saturating_sub(1) / 2
        );
    }
    EqualMeansMatrix {
        labels: groups.iter().map(|g| g.0.clone()).collect(),
        p_values: p,
        method: kind,
    }
}
