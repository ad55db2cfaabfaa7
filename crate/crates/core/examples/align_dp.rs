//! Order-preserving alignment of queries to segments by dynamic programming,
//! checked against exhaustive search.

use taskverify::{align_bruteforce, align_dp, ScoreMatrix};

fn main() -> taskverify::Result<()> {
    // Two queries, three segments: the second and third segments fit best.
    let scores = ScoreMatrix::from_probabilities(&[vec![0.1, 0.9, 0.2], vec![0.1, 0.3, 0.8]])?;
    let dp = align_dp(&scores)?;
    let brute = align_bruteforce(&scores)?;
    println!("dp     segments {:?} score {:.4}", dp.segments, dp.score);
    println!("brute  segments {:?} score {:.4}", brute.segments, brute.score);
    for row in dp.z() {
        println!("  {row:?}");
    }

    // The best single-query match may be unreachable once order is enforced.
    let crossed = ScoreMatrix::from_probabilities(&[vec![0.1, 0.2, 0.95], vec![0.9, 0.1, 0.1]])?;
    let a = align_dp(&crossed)?;
    println!("crossed: segments {:?} score {:.4}", a.segments, a.score);
    Ok(())
}
