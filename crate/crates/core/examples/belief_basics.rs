//! Belief arithmetic on a single rule.
//!
//! Shows the Bayes update, the selector-weighted estimate of `P(a|b)`, the
//! counter form of the criterion and saturation.

use brm::model::{belief_trace, belief_update, estimate_p_ab, min_selector, passes_criterion, Observation};

fn main() -> brm::Result<()> {
    println!("update(0.3, 0.6) = {:.6}", belief_update(0.3, 0.6));
    println!("update(0.5, 0.5) = {}", belief_update(0.5, 0.5));

    // 436 of 1000 conclusion occurrences came with the premise
    for s in [1.0, 0.78, 0.769, 0.5] {
        let p = estimate_p_ab(436, 1000, s)?;
        println!("s={s:<5} P(a|b)={p:.6} passes={}", passes_criterion(436, 1000, s)?);
    }
    println!("largest passing selector: {:.4}", min_selector(436, 1000)?);

    // one belief per rule observation; a first observation with P = 1 saturates
    use Observation::*;
    let trace = belief_trace(&[RuleSeen, ConclusionOnlySeen, ConclusionOnlySeen, RuleSeen], 0.3);
    println!("rule seen first: {trace:?}");
    let trace = belief_trace(&[ConclusionOnlySeen, RuleSeen, ConclusionOnlySeen, ConclusionOnlySeen, RuleSeen], 0.3);
    println!("conclusion seen first: {trace:?}");
    Ok(())
}
