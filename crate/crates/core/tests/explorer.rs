use std::collections::VecDeque;

use qsync::channels::{trace_distance, Alphabet, ChannelFamilyParam, DensityMatrix};
use qsync::explorer::{explore, export_json, StateGraph, DEFAULT_GRID, MERGE_FACTOR};
use qsync::matlib::ComplexMat3;

fn param(n: u32) -> ChannelFamilyParam {
    ChannelFamilyParam::new(n).unwrap()
}

/// Normalizes an integer matrix to unit trace.
fn normalized(rows: [[f64; 3]; 3]) -> DensityMatrix {
    let m = ComplexMat3::from_real(rows).unwrap();
    DensityMatrix::new(m.scale_real(1.0 / m.trace().re)).unwrap()
}

fn bfs_depths(g: &StateGraph) -> Vec<usize> {
    let mut depth = vec![usize::MAX; g.node_count()];
    depth[0] = 0;
    let mut queue = VecDeque::from([0]);
    while let Some(v) = queue.pop_front() {
        for e in g.edges.iter().filter(|e| e.src == v) {
            if depth[e.dst] == usize::MAX {
                depth[e.dst] = depth[v] + 1;
                queue.push_back(e.dst);
            }
        }
    }
    depth
}

#[test]
fn graph_invariants_hold() {
    for (n, depth) in [(1, 6), (2, 8), (3, 7), (5, 6)] {
        let g = explore(param(n), depth, DEFAULT_GRID).unwrap();
        let alphabet = Alphabet::new(param(n));
        assert_eq!(g.nodes[0].state, DensityMatrix::basis(0));
        assert_eq!(g.nodes[0].depth, 0);

        for node in &g.nodes {
            assert!(DensityMatrix::new(*node.state.mat()).is_ok());
        }
        for (i, a) in g.nodes.iter().enumerate() {
            for b in &g.nodes[i + 1..] {
                assert_ne!(a.key, b.key);
            }
        }
        for e in &g.edges {
            let image = alphabet.channel(e.letter).apply(&g.nodes[e.src].state).unwrap();
            assert!(trace_distance(&image, &g.nodes[e.dst].state) <= MERGE_FACTOR * g.grid);
        }
        let expanded = g.nodes.iter().filter(|v| v.depth < depth).count();
        assert_eq!(g.edges.len(), 2 * expanded);
        assert!(g.edges.iter().all(|e| g.nodes[e.src].depth < depth));

        let recorded: Vec<usize> = g.nodes.iter().map(|v| v.depth).collect();
        assert_eq!(bfs_depths(&g), recorded, "n={n}");
    }
}

#[test]
fn node_count_grows_monotonically() {
    for n in 1..=4 {
        let counts: Vec<usize> = (0..=8)
            .map(|d| explore(param(n), d, DEFAULT_GRID).unwrap().node_count())
            .collect();
        assert!(counts.windows(2).all(|w| w[0] <= w[1]), "n={n}: {counts:?}");
        if n == 1 {
            assert!(counts[2..].iter().all(|&c| c == 3));
        }
    }
}

#[test]
fn reproduces_the_drawn_fragment_for_n2() {
    let g = explore(param(2), 8, DEFAULT_GRID).unwrap();
    let drawn = [
        [[3.0, 3.0, 0.0], [3.0, 3.0, 0.0], [0.0, 0.0, 2.0]],
        [[3.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 1.0]],
        [[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 2.0]],
        [[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 1.0]],
        [[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 0.0]],
        [[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]],
        [[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]],
        [[1.0, -1.0, 0.0], [-1.0, 1.0, 0.0], [0.0, 0.0, 0.0]],
        [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 1.0]],
        [[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        [[1.0, -1.0, 0.0], [-1.0, 1.0, 0.0], [0.0, 0.0, 2.0]],
        [[0.0, 0.0, 0.0], [0.0, 3.0, 0.0], [0.0, 0.0, 1.0]],
        [[3.0, -3.0, 0.0], [-3.0, 3.0, 0.0], [0.0, 0.0, 2.0]],
        [[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 3.0]],
    ];
    for rows in drawn {
        assert!(g.find(&normalized(rows), 1e-9).is_some(), "missing {rows:?}");
    }

    // A few of the drawn transitions.
    let id = |rows| g.find(&normalized(rows), 1e-9).unwrap().id;
    let has = |src, letter: char, dst| {
        g.edges.iter().any(|e| e.src == src && e.letter.as_char() == letter && e.dst == dst)
    };
    let e1 = id([[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]);
    let e2 = id([[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]]);
    let e3 = id([[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
    let plus = id([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 0.0]]);
    let minus = id([[1.0, -1.0, 0.0], [-1.0, 1.0, 0.0], [0.0, 0.0, 0.0]]);
    let mixed23 = id([[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    assert!(has(e1, 'B', plus));
    assert!(has(e1, 'A', e2));
    assert!(has(plus, 'B', e2));
    assert!(has(plus, 'A', mixed23));
    assert!(has(e2, 'A', e3));
    assert!(has(e3, 'A', e2));
    assert!(has(e2, 'B', minus));
    assert!(has(minus, 'B', e1));
}

#[test]
fn exploration_is_deterministic() {
    let a = explore(param(3), 9, DEFAULT_GRID).unwrap();
    let b = explore(param(3), 9, DEFAULT_GRID).unwrap();
    assert_eq!(a, b);
    assert_eq!(export_json(&a), export_json(&b));
}

#[test]
fn json_round_trip_preserves_structure() {
    let g = explore(param(2), 6, DEFAULT_GRID).unwrap();
    let back = StateGraph::from_json(&export_json(&g)).unwrap();
    assert_eq!(back.node_count(), g.node_count());
    let mut a = g.edges.clone();
    let mut b = back.edges.clone();
    a.sort();
    b.sort();
    assert_eq!(a, b);
    for (x, y) in g.nodes.iter().zip(&back.nodes) {
        assert_eq!((x.id, x.depth), (y.id, y.depth));
        assert!(x.state.mat().approx_eq(y.state.mat(), 1e-15));
    }
}
