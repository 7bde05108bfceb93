use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use linrepair::blocks::{check_block_intersection_bound, random_family};
use linrepair::code::{random_mds_code, ArrayCode};
use linrepair::constructions::{g_subspace, hit_set, mobius, Mat2};
use linrepair::field::{Extension, Field};
use linrepair::geometry::LineIndex;
use linrepair::linalg::{enumerate_subspaces, gaussian_binomial, random_matrix, random_subspace, Matrix, Subspace};
use linrepair::repair::{bw_of_scheme, counting_bound, io_of_scheme, repair_report, RepairWitness, MDS_RETRY_CAP};
use linrepair::sim::{erase_and_repair, sample_codeword};

const ORDERS: [u32; 8] = [2, 3, 4, 5, 7, 8, 9, 16];

fn field_of(i: usize) -> Field {
    Field::of_order(ORDERS[i % ORDERS.len()]).unwrap()
}

fn small_code(seed: u64) -> ArrayCode {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (q, ell, r) = [(2, 2, 2), (3, 2, 2), (2, 2, 3), (4, 2, 2)][(seed % 4) as usize];
    let f = Field::of_order(q).unwrap();
    let max_n = (q as usize).pow(ell as u32) + r - 1;
    loop {
        let n = rng.gen_range(r + 1..=max_n.min(r + 4));
        if let Some(code) = random_mds_code(&f, n, ell, r, MDS_RETRY_CAP, &mut rng).unwrap() {
            return code;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms(i in 0usize..8, a in 0u32..256, b in 0u32..256, c in 0u32..256) {
        let f = field_of(i);
        let q = f.q();
        let (a, b, c) = (a % q, b % q, c % q);
        prop_assert_eq!(f.add(a, f.add(b, c)), f.add(f.add(a, b), c));
        prop_assert_eq!(f.mul(a, f.mul(b, c)), f.mul(f.mul(a, b), c));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.add(a, f.neg(a)), 0);
        if a != 0 {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
        prop_assert_eq!(f.pow(a, q as u64), a);
    }

    #[test]
    fn rank_nullity_and_kernel(i in 0usize..8, rows in 1usize..6, cols in 1usize..7, seed: u64) {
        let f = field_of(i);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_matrix(&f, rows, cols, &mut rng);
        let ker = m.kernel(&f);
        prop_assert_eq!(m.rank(&f) + ker.dim(), cols);
        prop_assert!(m.mul(&f, &ker.basis().transpose()).unwrap().is_zero());
        prop_assert_eq!(m.rank(&f), m.transpose().rank(&f));
    }

    #[test]
    fn intersection_dimension_formula(i in 0usize..4, d in 2usize..6, s1 in 0usize..6, s2 in 0usize..6, seed: u64) {
        let f = field_of(i);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_subspace(&f, d, s1.min(d), &mut rng);
        let v = random_subspace(&f, d, s2.min(d), &mut rng);
        let meet = u.intersection(&f, &v).unwrap();
        prop_assert_eq!(meet.dim(), u.intersect_dim(&f, &v).unwrap());
        prop_assert_eq!(meet.dim() + u.sum(&f, &v).unwrap().dim(), u.dim() + v.dim());
        prop_assert!(meet.is_subspace_of(&f, &u).unwrap() && meet.is_subspace_of(&f, &v).unwrap());
        let ann = u.annihilator(&f);
        prop_assert_eq!(ann.dim() + u.dim(), d);
        prop_assert!(ann.basis().mul(&f, &u.basis().transpose()).unwrap().is_zero());
        prop_assert_eq!(ann.annihilator(&f), u);
    }

    #[test]
    fn matrix_and_subspace_repair_costs_agree(seed: u64) {
        let code = small_code(seed);
        let f = code.field();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x55);
        let s = (code.r() - 1) * code.ell();
        for _ in 0..20 {
            let i = rng.gen_range(0..code.n());
            let Ok(w) = RepairWitness::new(&code, i, random_subspace(f, code.ambient_dim(), s, &mut rng)) else { continue };
            let bw = bw_of_scheme(&code, &w).unwrap();
            let io = io_of_scheme(&code, &w).unwrap();
            prop_assert!(io >= bw);
            for h in &w.profile {
                prop_assert!(h.captured <= h.intersection);
            }
            let cw = sample_codeword(&code, seed).unwrap();
            let trace = erase_and_repair(&code, &cw, &w).unwrap();
            prop_assert!(trace.matches);
            prop_assert_eq!(trace.downloaded(), bw);
            prop_assert_eq!(trace.accessed(), io);
        }
    }

    #[test]
    fn optimal_repair_respects_the_counting_bound(seed: u64) {
        let code = small_code(seed);
        let rep = repair_report(&code, 1_000_000).unwrap();
        prop_assert!(rep.search_mode.is_exhaustive());
        prop_assert!(rep.violations.is_empty(), "{:?}", rep.violations);
        let bound = counting_bound(code.n() as u32, code.r() as u32, code.ell() as u32, code.q()).unwrap();
        for x in &rep.nodes {
            prop_assert!(x.beta as i128 >= bound);
            prop_assert!(x.gamma >= x.beta);
        }
    }

    #[test]
    fn code_files_round_trip(seed: u64) {
        let code = small_code(seed);
        let back = ArrayCode::from_json(&code.to_json()).unwrap();
        prop_assert_eq!(&back, &code);
        prop_assert_eq!(back.blocks(), code.blocks());
    }

    #[test]
    fn hit_sets_transport_under_mobius(q in prop::sample::select(vec![3u32, 4]), entries in prop::array::uniform4(0u32..16), seed: u64) {
        let ext = Extension::standard(q, 2).unwrap();
        let top = ext.top();
        let g: Mat2 = [[entries[0] % top.q(), entries[1] % top.q()], [entries[2] % top.q(), entries[3] % top.q()]];
        prop_assume!(top.sub(top.mul(g[0][0], g[1][1]), top.mul(g[0][1], g[1][0])) != 0);
        let w = g_subspace(&ext, &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h: Mat2 = loop {
            let h = [[rng.gen_range(0..top.q()), rng.gen_range(0..top.q())], [rng.gen_range(0..top.q()), rng.gen_range(0..top.q())]];
            if top.sub(top.mul(h[0][0], h[1][1]), top.mul(h[0][1], h[1][0])) != 0 {
                break h;
            }
        };
        // h·g acts as the composition of the two fractional maps.
        let hg: Mat2 = [
            [top.add(top.mul(h[0][0], g[0][0]), top.mul(h[0][1], g[1][0])), top.add(top.mul(h[0][0], g[0][1]), top.mul(h[0][1], g[1][1]))],
            [top.add(top.mul(h[1][0], g[0][0]), top.mul(h[1][1], g[1][0])), top.add(top.mul(h[1][0], g[0][1]), top.mul(h[1][1], g[1][1]))],
        ];
        let mut moved: Vec<LineIndex> = hit_set(&ext, &w).unwrap().into_iter().map(|s| mobius(&ext, &h, s)).collect();
        moved.sort();
        prop_assert_eq!(hit_set(&ext, &g_subspace(&ext, &hg).unwrap()).unwrap(), moved);
    }

    #[test]
    fn block_checker_never_refutes_the_bound(n in 3usize..20, t in 2usize..8, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if let Some(fam) = random_family(&mut rng, n, t, 5) {
            let r = check_block_intersection_bound(&fam);
            prop_assert_eq!(r.hypothesis_violation, None);
            prop_assert_eq!(r.holds, Some(true));
            prop_assert!(r.certificate.len() <= 4);
        }
    }
}

#[test]
fn gaussian_binomials_count_enumerated_subspaces() {
    for (q, d, s) in [(2u32, 4usize, 2usize), (3, 4, 2), (2, 5, 3), (4, 3, 1), (2, 6, 3)] {
        let f = Field::of_order(q).unwrap();
        let all: Vec<Subspace> = enumerate_subspaces(&f, d, s, u128::MAX).unwrap().collect();
        assert_eq!(all.len() as u128, gaussian_binomial(d as u32, s as u32, q));
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), all.len());
    }
}

#[test]
fn inverse_round_trip() {
    let f = Field::of_order(9).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let m = random_matrix(&f, 4, 4, &mut rng);
        if let Some(inv) = m.inverse(&f) {
            assert_eq!(m.mul(&f, &inv).unwrap(), Matrix::identity(4));
        } else {
            assert!(m.rank(&f) < 4);
        }
    }
}
