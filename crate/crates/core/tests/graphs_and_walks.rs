use std::collections::HashSet;

use num_bigint::BigUint;
use sawlab::graphs::{ball, catalog, GraphOracle, Label, Model, Symmetry, Vertex, DEFAULT_MAX_VERTICES};
use sawlab::heights::default_height;
use sawlab::locality::{ball_iso, iso_radius, locality_scan, Family, KValue, ScanConfig, DEFAULT_SEARCH_BUDGET};
use sawlab::saw::{count_bridges, count_saws, naive_counts, EnumerationConfig};

fn all_models() -> Vec<Model> {
    vec![
        Model::Zd(1),
        Model::Zd(2),
        Model::Zd(3),
        Model::Dihedral,
        Model::Tree3,
        Model::Free2,
        Model::Heisenberg,
        Model::Lamplighter,
        Model::Hexagonal,
        Model::SquareOctagon,
        Model::CylinderZd(5),
        Model::LadderDihedral(4),
        Model::Grandparent,
        Model::DihedralLine,
    ]
}

#[test]
fn balls_are_connected_with_full_interior_degree() {
    for model in all_models() {
        let g = catalog(&model);
        let radius = if g.degree(&g.root()) >= 6 { 4 } else { 6 };
        let b = ball(g.as_ref(), radius, DEFAULT_MAX_VERTICES).unwrap();
        let mut seen = vec![false; b.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for &j in &b.adjacency[i] {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        assert!(seen.iter().all(|&s| s), "{}", model.name());
        for (i, v) in b.vertices.iter().enumerate() {
            if b.distances[i] < radius {
                assert_eq!(b.adjacency[i].len(), g.neighbors(v).len(), "{} at {v:?}", model.name());
                assert_eq!(b.adjacency[i].len(), g.degree(&g.root()), "{} at {v:?}", model.name());
            }
        }
        let keys: HashSet<Vec<u8>> = b.vertices.iter().map(|v| g.canonical_key(v)).collect();
        assert_eq!(keys.len(), b.len(), "{}", model.name());
    }
}

/// Honeycomb as a brick wall: `(x, y)` joins `(x +- 1, y)`, and `(x, y + 1)`
/// when `x + y` is even or `(x, y - 1)` otherwise.
struct BrickWall;

impl GraphOracle for BrickWall {
    fn name(&self) -> String {
        "brick_wall".into()
    }
    fn root(&self) -> Vertex {
        vec![0, 0]
    }
    fn neighbors(&self, v: &Vertex) -> Vec<(Vertex, Label)> {
        let (x, y) = (v[0], v[1]);
        let vertical = if (x + y).rem_euclid(2) == 0 { y + 1 } else { y - 1 };
        vec![(vec![x + 1, y], 0), (vec![x - 1, y], 0), (vec![x, vertical], 0)]
    }
    fn label_names(&self) -> Vec<String> {
        vec!["e".into()]
    }
    fn symmetries(&self) -> Vec<Symmetry> {
        Vec::new()
    }
}

/// Truncated square tiling: an octagon-separated grid of 4-cycles. Corner
/// `c` of cell `(i, j)` is east, north, west, south for `c = 0..4`.
struct TruncatedSquare;

impl GraphOracle for TruncatedSquare {
    fn name(&self) -> String {
        "truncated_square".into()
    }
    fn root(&self) -> Vertex {
        vec![0, 0, 0]
    }
    fn neighbors(&self, v: &Vertex) -> Vec<(Vertex, Label)> {
        let (i, j, c) = (v[0], v[1], v[2]);
        let across = match c {
            0 => vec![i + 1, j, 2],
            1 => vec![i, j + 1, 3],
            2 => vec![i - 1, j, 0],
            _ => vec![i, j - 1, 1],
        };
        vec![(vec![i, j, (c + 1) % 4], 0), (vec![i, j, (c + 3) % 4], 0), (across, 0)]
    }
    fn label_names(&self) -> Vec<String> {
        vec!["e".into()]
    }
    fn symmetries(&self) -> Vec<Symmetry> {
        Vec::new()
    }
}

#[test]
fn periodic_presets_match_hand_coded_tilings() {
    let hex = catalog(&Model::Hexagonal);
    let oct = catalog(&Model::SquareOctagon);
    for k in 0..=5 {
        let a = ball_iso(hex.as_ref(), &BrickWall, k, DEFAULT_MAX_VERTICES, DEFAULT_SEARCH_BUDGET).unwrap().0;
        assert!(a.isomorphic, "hexagonal at k = {k}");
        let b = ball_iso(oct.as_ref(), &TruncatedSquare, k, DEFAULT_MAX_VERTICES, DEFAULT_SEARCH_BUDGET).unwrap().0;
        assert!(b.isomorphic, "square/octagon at k = {k}");
    }
    let mixed = iso_radius(hex.as_ref(), &TruncatedSquare, 6, DEFAULT_MAX_VERTICES, DEFAULT_SEARCH_BUDGET).unwrap();
    assert!(matches!(mixed.k, KValue::Exact(k) if k < 6));
}

#[test]
fn cylinder_balls_agree_below_half_circumference() {
    let z2 = catalog(&Model::Zd(2));
    for m in 3..=10 {
        let cyl = catalog(&Model::CylinderZd(m));
        let last = (m / 2 - 1) as usize;
        for k in 0..=last {
            assert!(ball_iso(z2.as_ref(), cyl.as_ref(), k, DEFAULT_MAX_VERTICES, DEFAULT_SEARCH_BUDGET).unwrap().0.isomorphic);
        }
        assert!(!ball_iso(z2.as_ref(), cyl.as_ref(), last + 1, DEFAULT_MAX_VERTICES, DEFAULT_SEARCH_BUDGET).unwrap().0.isomorphic);
    }
}

#[test]
fn tree_and_square_lattice_differ_at_radius_one() {
    let r = iso_radius(catalog(&Model::Tree3).as_ref(), catalog(&Model::Zd(2)).as_ref(), 5, DEFAULT_MAX_VERTICES, DEFAULT_SEARCH_BUDGET)
        .unwrap();
    assert_eq!(r.k, KValue::Exact(0));
    let same = iso_radius(catalog(&Model::Zd(2)).as_ref(), catalog(&Model::Zd(2)).as_ref(), 5, DEFAULT_MAX_VERTICES, DEFAULT_SEARCH_BUDGET)
        .unwrap();
    assert_eq!(same.k, KValue::AtLeast(5));
}

#[test]
fn enumerator_matches_reference_for_every_model() {
    let cfg = EnumerationConfig::default();
    for model in all_models() {
        let g = catalog(&model);
        let n = if g.degree(&g.root()) >= 6 { 6 } else { 7 };
        let h = default_height(&model, n).unwrap();
        let saws = count_saws(g.as_ref(), n, &cfg).unwrap();
        assert_eq!(saws.counts, naive_counts(g.as_ref(), None, n), "{}", model.name());
        let bridges = count_bridges(g.as_ref(), &h, n, &cfg).unwrap();
        assert_eq!(bridges.counts, naive_counts(g.as_ref(), Some(&h), n), "{}", model.name());
        assert!(bridges.counts.iter().zip(&saws.counts).all(|(b, s)| b <= s));
        assert!(saws.counts.windows(2).skip(1).all(|w| w[1] >= w[0]), "{}", model.name());
    }
}

#[test]
fn scan_agrees_up_to_k_and_stabilizes() {
    let n_max = 5;
    let ms: Vec<i64> = (3..=14).collect();
    let report = locality_scan(Family::Cylinder, n_max, &ms, &ScanConfig::default()).unwrap();
    for r in &report.records {
        assert!(r.discrepancies.is_empty(), "m = {}", r.m);
        assert!(r.agree_up_to >= r.k.lower().min(n_max), "m = {}", r.m);
        assert_eq!(r.d, 1);
        assert_eq!(r.r, sawlab::heights::RValue::Exact(0));
    }
    let lower = |s: &str| -> BigUint { s.replace('.', "").parse().unwrap() };
    let tail: Vec<_> = report.records.iter().filter(|r| r.m > 2 * n_max as i64).collect();
    assert!(tail.len() >= 2);
    assert!(tail.windows(2).all(|w| lower(&w[0].lower_bound) <= lower(&w[1].lower_bound)));
    assert!(tail.iter().all(|r| r.sigma == report.base_sigma && r.bridges == report.base_bridges));
}
