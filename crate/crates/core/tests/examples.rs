//! Every example under `examples/` must keep running.

macro_rules! example {
    ($name:ident, $file:literal) => {
        #[path = $file]
        mod $name;

        #[test]
        fn $name() {
            $name::run_example().expect(concat!(stringify!($name), " runs"));
        }
    };
}

example!(acda_toy, "../examples/acda_toy.rs");
example!(convergence_diagnostics, "../examples/convergence_diagnostics.rs");
example!(file_workflow, "../examples/file_workflow.rs");
example!(flat_prior_propriety, "../examples/flat_prior_propriety.rs");
example!(g_step, "../examples/g_step.rs");
example!(haar_pxda_sandwich, "../examples/haar_pxda_sandwich.rs");
example!(lupus_comparison, "../examples/lupus_comparison.rs");
example!(theory_report, "../examples/theory_report.rs");
example!(truncated_normal, "../examples/truncated_normal.rs");
