use std::ffi::{c_char, CStr, CString};
use std::ptr;

use pca_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    unsafe { pca_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }
        .to_string_lossy()
        .into_owned()
}

fn grid(gamma: u32) -> PcaMapParams {
    PcaMapParams {
        kind: PcaMapKind::Grid,
        n: 0,
        gamma,
        p_edge: 0.0,
        p_wire: 0.0,
        full_inner: false,
    }
}

#[test]
fn graph_handles() {
    unsafe {
        let mut g: *mut PcaGraph = ptr::null_mut();
        assert_eq!(pca_graph_torus(4, 4, false, &mut g), PcaStatus::Ok);
        let (mut n, mut e, mut d, mut conn) = (0usize, 0usize, 0usize, false);
        assert_eq!(pca_graph_node_count(g, &mut n), PcaStatus::Ok);
        assert_eq!(pca_graph_edge_count(g, &mut e), PcaStatus::Ok);
        assert_eq!(pca_graph_degree(g, 5, &mut d), PcaStatus::Ok);
        assert_eq!(pca_graph_is_connected(g, &mut conn), PcaStatus::Ok);
        assert_eq!((n, e, d, conn), (16, 32, 4, true));
        assert_eq!(pca_graph_degree(g, 16, &mut d), PcaStatus::Domain);
        assert!(last_error().contains("out of range"));
        pca_graph_free(g);
    }
}

#[test]
fn edge_list_round_trip() {
    unsafe {
        let mut g: *mut PcaGraph = ptr::null_mut();
        assert_eq!(pca_graph_smallworld(30, 4, 0.2, 7, &mut g), PcaStatus::Ok);
        let mut needed = 0usize;
        assert_eq!(
            pca_graph_edge_list(g, ptr::null_mut(), 0, &mut needed),
            PcaStatus::BufferTooSmall
        );
        let mut buf = vec![0 as c_char; needed];
        assert_eq!(
            pca_graph_edge_list(g, buf.as_mut_ptr(), needed, ptr::null_mut()),
            PcaStatus::Ok
        );
        let text = CStr::from_ptr(buf.as_ptr()).to_owned();
        assert!(text.to_str().unwrap().starts_with("n=30 kind=smallworld"));
        let mut h: *mut PcaGraph = ptr::null_mut();
        assert_eq!(
            pca_graph_from_edge_list(text.as_ptr(), &mut h),
            PcaStatus::Ok
        );
        let (mut a, mut b) = (0usize, 0usize);
        pca_graph_edge_count(g, &mut a);
        pca_graph_edge_count(h, &mut b);
        assert_eq!(a, b);
        pca_graph_free(g);
        pca_graph_free(h);
        let bad = CString::new("n=3 kind=torus\n0 0\n").unwrap();
        assert_ne!(
            pca_graph_from_edge_list(bad.as_ptr(), &mut h),
            PcaStatus::Ok
        );
    }
}

#[test]
fn constructor_errors_map_to_codes() {
    unsafe {
        let mut g: *mut PcaGraph = ptr::null_mut();
        assert_eq!(pca_graph_torus(4, 5, false, &mut g), PcaStatus::Config);
        assert!(g.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(
            pca_graph_random(10, 0.5, 1, ptr::null_mut()),
            PcaStatus::NullPointer
        );
        let mut n = 0usize;
        assert_eq!(
            pca_graph_node_count(ptr::null(), &mut n),
            PcaStatus::NullPointer
        );
        assert_eq!(pca_graph_random(10, 0.5, 1, &mut g), PcaStatus::Ok);
        assert_eq!(last_error(), "");
        pca_graph_free(g);
        pca_graph_free(ptr::null_mut());
    }
}

#[test]
fn runs_match_the_library() {
    unsafe {
        let mut g: *mut PcaGraph = ptr::null_mut();
        pca_graph_random(40, 0.3, 11, &mut g);
        let mut a = vec![0.0; 101];
        let mut b = vec![0.0; 101];
        assert_eq!(
            pca_run(g, 0.2, f64::NAN, 100, 5, a.as_mut_ptr(), a.len()),
            PcaStatus::Ok
        );
        assert_eq!(
            pca_run(g, 0.2, f64::NAN, 100, 5, b.as_mut_ptr(), b.len()),
            PcaStatus::Ok
        );
        assert_eq!(a, b);
        let lib = pca_core::graph::build_random(40, 0.3, 11).unwrap();
        let want = pca_core::pca::run(
            &lib,
            pca_core::RuleParams::majority(0.2).unwrap(),
            None,
            100,
            5,
        )
        .unwrap();
        assert_eq!(a, want.values);
        assert_eq!(
            pca_run(g, 0.2, 0.5, 100, 5, a.as_mut_ptr(), 100),
            PcaStatus::BufferTooSmall
        );
        assert_eq!(
            pca_run(g, 0.7, 0.5, 100, 5, a.as_mut_ptr(), 101),
            PcaStatus::Config
        );
        pca_graph_free(g);
    }
}

#[test]
fn maps_and_fixed_points() {
    unsafe {
        let mut m: *mut PcaMap = ptr::null_mut();
        assert_eq!(pca_map_new(&grid(5), 0.15, &mut m), PcaStatus::Ok);
        let (mut v, mut s, mut var) = (0.0, 0.0, 0.0);
        pca_map_eval(m, 0.5, &mut v);
        pca_map_derivative(m, 0.5, &mut s);
        pca_map_sigma2(m, 100, 0.5, &mut var);
        assert_eq!(v, 0.5);
        assert!((s - 1.3125).abs() < 1e-12);
        assert!((var - 0.0025).abs() < 1e-15);
        assert_eq!(pca_map_eval(m, 1.5, &mut v), PcaStatus::Domain);
        let mut count = 0usize;
        let mut fps = [PcaFixedPoint {
            rho_star: 0.0,
            slope: 0.0,
            stability: PcaStability::Marginal,
        }; 3];
        assert_eq!(
            pca_fixed_points(m, fps.as_mut_ptr(), 1, &mut count),
            PcaStatus::BufferTooSmall
        );
        assert_eq!(count, 3);
        assert_eq!(
            pca_fixed_points(m, fps.as_mut_ptr(), 3, &mut count),
            PcaStatus::Ok
        );
        assert_eq!(fps[1].stability, PcaStability::Repelling);
        assert!((fps[0].rho_star + fps[2].rho_star - 1.0).abs() < 1e-8);
        pca_map_free(m);

        let sw = PcaMapParams {
            kind: PcaMapKind::SwComposite,
            n: 100,
            gamma: 4,
            p_edge: 0.0,
            p_wire: 0.4,
            full_inner: false,
        };
        assert_eq!(pca_map_new(&sw, 0.1, &mut m), PcaStatus::Ok);
        assert_eq!(pca_map_sigma2(m, 50, 0.3, &mut var), PcaStatus::Domain);
        pca_map_free(m);
        let sparse = PcaMapParams {
            kind: PcaMapKind::RgNu,
            n: 5,
            gamma: 0,
            p_edge: 0.1,
            p_wire: 0.0,
            full_inner: false,
        };
        assert_eq!(pca_map_new(&sparse, 0.1, &mut m), PcaStatus::Config);
    }
}

#[test]
fn critical_point_and_intervals() {
    unsafe {
        let mut pc = 0.0;
        assert_eq!(
            pca_critical_point(&grid(5), 1e-3, 0.5, 1e-9, &mut pc),
            PcaStatus::Ok
        );
        assert!((pc - 7.0 / 30.0).abs() < 1e-6);
        let rg = PcaMapParams {
            kind: PcaMapKind::GridPe,
            n: 30,
            gamma: 0,
            p_edge: 0.4,
            p_wire: 0.0,
            full_inner: false,
        };
        assert_ne!(
            pca_critical_point(&rg, 1e-3, 0.5, 1e-9, &mut pc),
            PcaStatus::Ok
        );
        let mut iv = PcaInterval {
            center: 0.0,
            half_width: 0.0,
            lower: 0.0,
            upper: 0.0,
            clipped: false,
        };
        assert_eq!(pca_chernov_interval(0.5, 100, 0.05, &mut iv), PcaStatus::Ok);
        assert!((iv.half_width - 0.135_810_151_574_061_95).abs() < 1e-15);
        assert_eq!(pca_clt_interval(0.5, 0.0025, 0.95, &mut iv), PcaStatus::Ok);
        assert!((iv.half_width - 0.098).abs() < 1e-15);
        assert_eq!(pca_clt_interval(0.05, 0.0025, 0.90, &mut iv), PcaStatus::Ok);
        assert!(iv.clipped && iv.lower == 0.0);
        assert_eq!(
            pca_clt_interval(0.5, 0.0025, 0.99, &mut iv),
            PcaStatus::Config
        );
    }
}
