// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

use std::f64::consts::PI;
use std::fs;

use rhbm::calibration::{sample_angles, sample_raw_fitness};
use rhbm::embedding::{
    convert_embedder_coordinates, expected_degrees_from_embedding, expected_mixing_from_embedding,
    load_embedding, sample_graphs_from_embedding, sd_edge_probability, EmbeddingSD,
};
use rhbm::generate::{connection_probability, S1Params};
use rhbm::metrics::empirical_mixing;
use rhbm::mixing::{make_partition, BlockPartition};
use rhbm::{CounterRng, Error};

fn sphere_point(polar: f64, azimuth: f64) -> [f64; 3] {
    [polar.sin() * azimuth.cos(), polar.sin() * azimuth.sin(), polar.cos()]
}

fn six_node_sphere() -> EmbeddingSD {
    let pts = [(0.1, 0.0), (0.4, 1.0), (1.2, 2.0), (2.0, 0.5), (2.5, 4.0), (3.0, 5.5)];
    let positions = pts.iter().flat_map(|&(p, a)| sphere_point(p, a)).collect();
    EmbeddingSD::new(2, vec![1.0, 2.0, 3.0, 1.5, 4.0, 2.5], positions, 3.0, 0.4, 0.7).unwrap()
}

#[test]
fn expected_mixing_matches_hand_summation() {
    let e = six_node_sphere();
    let part = BlockPartition::from_assignment(vec![0, 0, 1, 1, 1, 0]).unwrap();
    let mut want = [[0.0; 2]; 2];
    let mut total = 0.0;
    for i in 0..6 {
        for j in i + 1..6 {
            // Independent evaluation of the connection law on the sphere.
            let (u, v) = (e.position(i), e.position(j));
            let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
            let x = e.radius() * dot.clamp(-1.0, 1.0).acos();
            let scale = (e.mu() * e.kappa()[i] * e.kappa()[j]).sqrt();
            let p = 1.0 / (1.0 + (x / scale).powf(e.beta()));
            let (a, b) = (part.block_of(i), part.block_of(j));
            want[a][b] += p;
            want[b][a] += p;
            total += 2.0 * p;
        }
    }
    let m = expected_mixing_from_embedding(&e, &part).unwrap();
    for a in 0..2 {
        for b in 0..2 {
            assert!((m.get(a, b) - want[a][b]).abs() < 1e-12);
        }
    }
    assert!((m.total() - total).abs() < 1e-12);
    let degrees: f64 = expected_degrees_from_embedding(&e).iter().sum();
    assert!((degrees - m.total()).abs() <= 1e-8 * m.total());
}

#[test]
fn circle_embedding_reproduces_s1_probabilities() {
    let n = 200;
    let rng = CounterRng::new(3);
    let kappa: Vec<f64> = sample_raw_fitness(n, 2.5, &rng).unwrap().iter().map(|x| 4.0 * x).collect();
    let theta = sample_angles(n, &rng);
    let params = S1Params::with_default_density(kappa, 2.3).unwrap();
    let e = EmbeddingSD::from_s1(&params, &theta).unwrap();
    for k in 0..2000u64 {
        let i = (k * 7919 % n as u64) as usize;
        let j = (k * 104_729 % n as u64) as usize;
        if i == j {
            continue;
        }
        let a = params.edge_probability(&theta, i, j);
        let b = sd_edge_probability(&e, i, j).unwrap();
        assert!((a - b).abs() <= 1e-12, "pair ({i}, {j}): {a} vs {b}");
    }
}

#[test]
fn extreme_density_limits() {
    let e = six_node_sphere();
    let tiny = EmbeddingSD::new(
        2,
        e.kappa().to_vec(),
        (0..6).flat_map(|i| e.position(i).to_vec()).collect(),
        3.0,
        1e-300,
        0.7,
    )
    .unwrap();
    let part = make_partition(6, 2, None).unwrap();
    assert_eq!(expected_mixing_from_embedding(&tiny, &part).unwrap().total(), 0.0);

    let huge = EmbeddingSD::new(2, tiny.kappa().to_vec(), (0..6).flat_map(|i| e.position(i).to_vec()).collect(), 3.0, 1e200, 0.7)
        .unwrap();
    for g in sample_graphs_from_embedding(&huge, 3, &CounterRng::new(1)).unwrap() {
        assert_eq!(g.num_edges(), 15);
    }
}

#[test]
fn sampled_edge_counts_follow_probabilities() {
    let n = 100;
    let rng = CounterRng::new(12);
    let theta = sample_angles(n, &rng);
    let params = S1Params::with_default_density(vec![5.0; n], 2.0).unwrap();
    let e = EmbeddingSD::from_s1(&params, &theta).unwrap();
    let (mut mu, mut var) = (0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            let p = sd_edge_probability(&e, i, j).unwrap();
            mu += p;
            var += p * (1.0 - p);
        }
    }
    let graphs = sample_graphs_from_embedding(&e, 50, &CounterRng::new(5)).unwrap();
    assert_eq!(graphs.len(), 50);
    let mean = graphs.iter().map(|g| g.num_edges() as f64).sum::<f64>() / 50.0;
    assert!((mean - mu).abs() <= 3.0 * (var / 50.0).sqrt(), "mean {mean}, expected {mu}");
    assert_ne!(graphs[0], graphs[1]);
    assert_eq!(graphs, sample_graphs_from_embedding(&e, 50, &CounterRng::new(5)).unwrap());
}

#[test]
fn sampled_mixing_converges_to_expected_mixing() {
    let n = 300;
    let rng = CounterRng::new(21);
    let theta = sample_angles(n, &rng);
    let kappa: Vec<f64> = sample_raw_fitness(n, 2.5, &rng).unwrap().iter().map(|x| 3.0 * x).collect();
    let e = EmbeddingSD::from_s1(&S1Params::with_default_density(kappa, 2.5).unwrap(), &theta).unwrap();
    let part = make_partition(n, 3, None).unwrap();
    let expected = expected_mixing_from_embedding(&e, &part).unwrap();
    let graphs = sample_graphs_from_embedding(&e, 100, &CounterRng::new(8)).unwrap();
    let mixes: Vec<_> = graphs.iter().map(|g| empirical_mixing(g, &part).unwrap()).collect();
    for a in 0..3 {
        for b in 0..3 {
            let v: Vec<f64> = mixes.iter().map(|m| m.get(a, b)).collect();
            let mean = v.iter().sum::<f64>() / 100.0;
            let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 99.0).sqrt();
            assert!((mean - expected.get(a, b)).abs() <= 3.0 * sd / 10.0, "F[{a}][{b}]");
        }
    }
}

#[test]
fn csv_round_trip_and_rejections() {
    let dir = tempfile::tempdir().unwrap();
    let e = six_node_sphere();
    let path = dir.path().join("emb.csv");
    e.write_csv(&path).unwrap();
    let back = load_embedding(&path).unwrap();
    assert_eq!(back.dim(), 2);
    for i in 0..6 {
        for (a, b) in e.position(i).iter().zip(back.position(i)) {
            assert!((a - b).abs() < 1e-12);
        }
    }
    assert_eq!(back.kappa(), e.kappa());

    let one = dir.path().join("one.csv");
    fs::write(&one, "# D=1 beta=2 mu=0.5 R=1\nnode,kappa,x1,x2\n0,3.5,1,0\n").unwrap();
    let single = load_embedding(&one).unwrap();
    assert_eq!((single.dim(), single.kappa()), (1, &[3.5][..]));

    let short = dir.path().join("short.csv");
    fs::write(&short, "# D=1 beta=2 mu=0.5 R=1\nnode,kappa,x1,x2\n0,1,1,0\n1,1,0.5,0\n").unwrap();
    match load_embedding(&short) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
        other => panic!("expected a parse error, got {other:?}"),
    }

    // Tiny norm errors are corrected; R defaults to unit density.
    let sloppy = dir.path().join("sloppy.csv");
    fs::write(&sloppy, "# D=1 beta=2 mu=0.5\nnode,kappa,x1,x2\n0,1,1.0000001,0\n1,1,0,1\n").unwrap();
    let fixed = load_embedding(&sloppy).unwrap();
    assert_eq!(fixed.position(0), &[1.0, 0.0]);
    assert!((fixed.radius() - 2.0 / (2.0 * PI)).abs() < 1e-12);
}

#[test]
fn converts_external_coordinate_layout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("graph.inf_coord");
    fs::write(
        &path,
        "# - beta:          2.5\n# - mu:            0.0123\n# - radius_S^D:    4.2\n\
         # vertex kappa radius x1 x2\n2 3.0 11.1 0 1\n0 1.5 12.2 1 0\n1 2.0 10.5 -1 0\n",
    )
    .unwrap();
    let e = convert_embedder_coordinates(&path, 1).unwrap();
    assert_eq!((e.beta(), e.mu(), e.radius()), (2.5, 0.0123, 4.2));
    assert_eq!(e.kappa(), &[1.5, 2.0, 3.0]);
    assert_eq!(e.position(2), &[0.0, 1.0]);
    let expected = connection_probability(4.2 * PI, 0.0123 * 1.5 * 2.0, 2.5);
    assert!((sd_edge_probability(&e, 0, 1).unwrap() - expected).abs() < 1e-15);
}
