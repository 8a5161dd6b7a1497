// timing probe for full-scale runs (removed before delivery)
use prefbo::driver::{run, Method, RunConfig};
use prefbo::metrics::ref_solution;
use prefbo::problems::{Benchmark, Problem, ProblemSpec};
use prefbo::scalarize::PreferenceSpec;
use std::time::Instant;

fn main() {
    let problem = ProblemSpec::new(Benchmark::Dtlz2, 5, 2).unwrap();
    let pref = PreferenceSpec::new(vec![0.5, 0.5], problem.ideal().to_vec(), problem.nadir().to_vec()).unwrap();
    let front = problem.sample_front(10_001).unwrap();
    let rs = ref_solution(&front, &pref).unwrap();
    eprintln!("refsol: {:?} g*={}", rs.objectives, rs.asf);
    for method in [Method::Mono, Method::MultiGumbel, Method::MultiLaplace] {
        let cfg = RunConfig::with_defaults(method, 5, 42);
        let t = Instant::now();
        let trace = run(&problem, &pref, &cfg, Some(rs.asf)).unwrap();
        let last = trace.records.last().unwrap();
        eprintln!("{method}: {} evals, final min ASF dist {:.5}, wall {:.1}s",
            trace.records.len(), last.min_asf_distance, t.elapsed().as_secs_f64());
    }
}
