use pqharm::verify::{run, VerifyOptions};

fn main() {
    let report = run(VerifyOptions { seed: 42, fast: true });
    for c in &report.criteria {
        let status = if c.ok() { "PASS" } else { "FAIL" };
        println!("{status} criterion {:>2} ({:.3}s): {}", c.id, c.elapsed().as_secs_f64(), c.name);
        for k in c.failed_checks() {
            println!("    {} = {:e}, want {} {:e}", k.label, k.value, k.relation, k.bound);
        }
        for t in c.timings.iter().filter(|t| !t.within_budget()) {
            println!("    {} took {:.3}s, over budget", t.label, t.elapsed.as_secs_f64());
        }
    }
    let failed: Vec<usize> = report.criteria.iter().filter(|c| !c.ok()).map(|c| c.id).collect();
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
    println!("all {} criteria passed", report.criteria.len());
}
