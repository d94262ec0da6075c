//! Partial AUC of a fixed score assignment: rank-weighted estimator, ROC
//! integration and TPR readouts, plus the ROC staircase as CSV.
//!
//! cargo run --example pauc_metrics

use pauc::metrics::{empirical_auc, empirical_pauc, pauc_by_integration, roc_curve, tpr_at_fpr};
use pauc::{PaucRange, ScoreAssignment};

fn main() -> pauc::Result<()> {
    let sa = ScoreAssignment::new(vec![0.9, 0.4], vec![0.8, 0.5, 0.3, 0.1])?;
    let roc = roc_curve(&sa);

    println!("AUC = {}", empirical_auc(&sa));
    for (alpha, beta) in [(0.0, 0.5), (0.0, 0.3), (0.25, 0.75), (0.1, 0.2)] {
        let r = PaucRange::new(alpha, beta)?;
        println!(
            "pAUC({alpha}, {beta}) = {:.4}  (integrated: {:.4})",
            empirical_pauc(&sa, r),
            pauc_by_integration(&roc, r)
        );
    }
    for fpr in [0.0, 0.25, 0.5] {
        println!("TPR at FPR {fpr} = {}", tpr_at_fpr(&roc, fpr));
    }

    // an inverted band is rejected
    assert!(PaucRange::new(0.3, 0.1).is_err());

    println!();
    roc.write_csv(std::io::stdout())
}
