//! Fits a Gaussian mixture per class with EM and combines the fits into a
//! log-density-ratio scorer, before any partial-AUC training.
//!
//! cargo run --release --example gmm_em

use pauc::dataset::synth_xor_gmm;
use pauc::scoring::fit_em;
use pauc::trainer::evaluate_scorer;
use pauc::Scorer;

fn main() -> pauc::Result<()> {
    let data = synth_xor_gmm(200, 2000, 0.5, 3)?;
    let pos = fit_em(data.positives(), 2, 0, 1e-6, 200)?;
    let neg = fit_em(data.negatives(), 2, 1, 1e-6, 200)?;

    for (name, fit) in [("positive", &pos), ("negative", &neg)] {
        println!(
            "{name}: {} iterations, converged {}, mean log-likelihood {:.4}",
            fit.iterations(),
            fit.converged,
            fit.log_likelihood.last().copied().unwrap_or(f64::NAN)
        );
        for (w, m) in fit.params.weights().iter().zip(&fit.params.means) {
            println!("  weight {w:.3} mean ({:+.3}, {:+.3})", m[0], m[1]);
        }
    }

    let scorer = Scorer::gmm_ratio(&pos.params, &neg.params)?;
    let report = evaluate_scorer(&scorer, &data)?;
    println!("in-sample AUC of the EM ratio: {:.4}", report.auc);
    for r in &report.readouts {
        println!("  FPR {:<4}  pAUC {:.4}  TPR {:.4}", r.fpr, r.pauc, r.tpr);
    }
    Ok(())
}
