mod common;

use common::{dense, is_feasible, pagerank_power, vertex_enumeration};
use pdhg::instance_gen::{gen_pagerank, gen_random_lp, pagerank_lp, preferential_attachment, read_edge_list, PagerankConfig};
use pdhg::{solve, SolverParams, Status};

#[test]
fn power_iteration_vector_satisfies_every_row() {
    for (n, seed) in [(50, 0), (300, 4), (1000, 9)] {
        let cfg = PagerankConfig { n_nodes: n, seed, ..Default::default() };
        let p = gen_pagerank(&cfg).unwrap();
        let g = preferential_attachment(n, cfg.attachment, seed);
        let x = pagerank_power(n, &g.edges, cfg.damping, 300);
        let (a, gd) = dense(&p);
        for (row, h) in gd.iter().zip(p.h()) {
            let gx: f64 = row.iter().zip(&x).map(|(r, v)| r * v).sum();
            assert!(gx >= h - 1e-10, "row violated by {}", h - gx);
        }
        let sum: f64 = a[0].iter().zip(&x).map(|(r, v)| r * v).sum();
        assert!((sum - 1.0).abs() <= 1e-10);
    }
}

#[test]
fn pagerank_solution_matches_power_iteration() {
    let cfg = PagerankConfig { n_nodes: 500, seed: 3, ..Default::default() };
    let p = gen_pagerank(&cfg).unwrap();
    let r = solve(&p, &SolverParams { eps: 1e-8, ..Default::default() }).unwrap();
    assert_eq!(r.status, Status::Optimal);
    let g = preferential_attachment(500, cfg.attachment, cfg.seed);
    let want = pagerank_power(500, &g.edges, cfg.damping, 300);
    let dev = r.x.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(dev < 1e-6, "max deviation {dev}");
}

#[test]
fn edge_list_graph_roundtrip() {
    let text = "# comment\n10 20\n20 30\n30 10\n30 20\n\n40 10\n";
    let g = read_edge_list(text.as_bytes()).unwrap();
    assert_eq!(g.n_nodes, 4);
    let p = pagerank_lp(&g, 0.85).unwrap();
    assert_eq!((p.m(), p.n()), (5, 4));
    let x = pagerank_power(4, &g.edges, 0.85, 300);
    let r = solve(&p, &SolverParams { eps: 1e-9, ..Default::default() }).unwrap();
    assert_eq!(r.status, Status::Optimal);
    for (a, b) in r.x.iter().zip(&x) {
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }
}

#[test]
fn bad_edge_list_reports_line() {
    let err = read_edge_list("1 2\n3 x\n".as_bytes()).unwrap_err();
    assert!(err.to_string().contains('2'), "{err}");
}

#[test]
fn random_lps_are_feasible_and_reproducible() {
    for seed in 0..20 {
        let p = gen_random_lp(6, 5, 0.5, seed);
        assert_eq!(p, gen_random_lp(6, 5, 0.5, seed));
        assert!(vertex_enumeration(&p).is_some());
        assert!(p.lower().iter().all(|&v| v == 0.0) && p.upper().iter().all(|&v| v == 1.0));
    }
}

#[test]
fn ten_by_ten_matches_enumeration() {
    let p = gen_random_lp(10, 10, 0.5, 42);
    let want = vertex_enumeration(&p).unwrap();
    let r = solve(&p, &SolverParams { eps: 1e-8, ..Default::default() }).unwrap();
    assert_eq!(r.status, Status::Optimal);
    assert!((r.report.primal_obj - want).abs() <= 1e-6 * want.abs().max(1.0), "{} vs {want}", r.report.primal_obj);
    assert!(is_feasible(&p, &r.x, 1e-6));
}
