use std::ffi::CStr;
use std::ptr;

use pprls_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(pprls_last_error_message()) }.to_string_lossy().into_owned()
}

/// Two triangles {0,1,2} and {3,4,5} joined by the edge 2–3.
fn barbell() -> *mut PprlsGraph {
    let edges = [0usize, 1, 1, 2, 0, 2, 2, 3, 3, 4, 4, 5, 3, 5];
    let mut g = ptr::null_mut();
    let st = unsafe { pprls_graph_from_edges(6, edges.as_ptr(), 7, &mut g) };
    assert_eq!(st, PprlsStatus::Ok);
    g
}

#[test]
fn graph_from_points_matches_pairwise_distances() {
    let coords = [0.0, 0.0, 0.5, 0.0, 1.5, 0.0, 1.5, 0.9];
    let mut g = ptr::null_mut();
    unsafe {
        assert_eq!(pprls_graph_from_points(coords.as_ptr(), 4, 2, 1.0, &mut g), PprlsStatus::Ok);
        assert_eq!(pprls_graph_num_vertices(g), 4);
        assert_eq!(pprls_graph_num_edges(g), 3);
        let mut deg = [0usize; 4];
        assert_eq!(pprls_graph_degrees(g, deg.as_mut_ptr(), 4), PprlsStatus::Ok);
        assert_eq!(deg, [1, 2, 2, 1]);
        assert_eq!(pprls_graph_degrees(g, deg.as_mut_ptr(), 3), PprlsStatus::BufferTooSmall);
        pprls_graph_free(g);

        let mut r = 0.0;
        assert_eq!(pprls_smallest_connecting_radius(coords.as_ptr(), 4, 2, &mut r), PprlsStatus::Ok);
        assert!((r - 1.0).abs() < 1e-12);
    }
}

#[test]
fn cut_cluster_and_ppr_through_handles() {
    let g = barbell();
    unsafe {
        let mut phi = 0.0;
        let left = [0usize, 1, 2];
        assert_eq!(pprls_normalized_cut(g, left.as_ptr(), 3, &mut phi), PprlsStatus::Ok);
        assert!((phi - 1.0 / 7.0).abs() < 1e-15);

        let mut p = ptr::null_mut();
        assert_eq!(pprls_ppr_exact(g, 0, 0.1, 1e-12, &mut p), PprlsStatus::Ok);
        let len = pprls_ppr_len(p);
        assert_eq!(len, 6);
        let mut vals = vec![0.0; len];
        assert_eq!(pprls_ppr_values(p, vals.as_mut_ptr(), len), PprlsStatus::Ok);
        assert!((vals.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(vals[0] > vals[5]);
        pprls_ppr_free(p);

        let mut q = ptr::null_mut();
        assert_eq!(pprls_ppr_push(g, 0, 0.1, 1e-6, &mut q), PprlsStatus::Ok);
        let mut approx = vec![0.0; 6];
        assert_eq!(pprls_ppr_values(q, approx.as_mut_ptr(), 6), PprlsStatus::Ok);
        for (a, e) in approx.iter().zip(&vals) {
            assert!(*a <= e + 1e-12);
        }
        pprls_ppr_free(q);

        let mut c = ptr::null_mut();
        assert_eq!(pprls_cluster(g, 0, 0.1, 0.0, 1.0, &mut c), PprlsStatus::Ok);
        assert_eq!(pprls_cluster_size(c), 3);
        assert!((pprls_cluster_phi(c) - 1.0 / 7.0).abs() < 1e-12);
        let mut members = [9usize; 3];
        assert_eq!(pprls_cluster_members(c, members.as_mut_ptr(), 3), PprlsStatus::Ok);
        assert_eq!(members, [0, 1, 2]);
        pprls_cluster_free(c);

        let (mut tau, mut mixed) = (0u64, false);
        assert_eq!(pprls_mixing_time(g, 1000, &mut tau, &mut mixed), PprlsStatus::Ok);
        assert!(mixed && tau > 0);
        pprls_graph_free(g);
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(pprls_graph_from_points(ptr::null(), 3, 2, 1.0, &mut g), PprlsStatus::NullPointer);
        assert!(last_error().contains("coords"));
        assert!(g.is_null());

        let coords = [0.0, 0.0, 1.0, 1.0];
        assert_eq!(pprls_graph_from_points(coords.as_ptr(), 2, 2, -1.0, &mut g), PprlsStatus::InvalidArgument);
        assert!(!last_error().is_empty());

        let g = barbell();
        let mut p = ptr::null_mut();
        assert_eq!(pprls_ppr_exact(g, 17, 0.1, 1e-9, &mut p), PprlsStatus::InvalidArgument);
        assert_eq!(pprls_ppr_exact(g, 0, 1.5, 1e-9, &mut p), PprlsStatus::InvalidArgument);
        assert!(p.is_null());

        // Nothing lies strictly inside the interval, so there is no sweep set.
        let mut c = ptr::null_mut();
        assert_eq!(pprls_cluster(g, 0, 0.1, 0.5, 0.6, &mut c), PprlsStatus::NoCluster);
        pprls_graph_free(g);

        let edges = [0usize, 1, 2, 3];
        let mut split = ptr::null_mut();
        assert_eq!(pprls_graph_from_edges(4, edges.as_ptr(), 2, &mut split), PprlsStatus::Ok);
        let (mut tau, mut mixed) = (0u64, true);
        assert_eq!(pprls_mixing_time(split, 100, &mut tau, &mut mixed), PprlsStatus::Disconnected);
        pprls_graph_free(split);

        let mut v = 0.0;
        assert_eq!(pprls_spherical_cap_volume(1.0, 3.0, 2, &mut v), PprlsStatus::InvalidArgument);
        assert_eq!(pprls_spherical_cap_volume(1.0, 1.0, 2, ptr::null_mut()), PprlsStatus::NullPointer);
        assert_eq!(pprls_spherical_cap_volume(1.0, 1.0, 2, &mut v), PprlsStatus::Ok);
        assert!((v - std::f64::consts::FRAC_PI_2).abs() < 1e-9);

        // Null handles are tolerated by the getters and free functions.
        assert_eq!(pprls_graph_num_vertices(ptr::null()), 0);
        assert_eq!(pprls_cluster_size(ptr::null()), 0);
        pprls_graph_free(ptr::null_mut());
        pprls_ppr_free(ptr::null_mut());
        pprls_cluster_free(ptr::null_mut());
    }
}

#[test]
fn generated_header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/pprls.h")).unwrap();
    assert!(header.contains("#ifndef PPRLS_H"));
    assert!(header.contains("typedef struct PprlsGraph PprlsGraph;"));
    assert!(header.contains("PPRLS_STATUS_BUFFER_TOO_SMALL"));
    for f in [
        "pprls_last_error_message",
        "pprls_graph_from_points",
        "pprls_graph_from_edges",
        "pprls_ppr_exact",
        "pprls_ppr_push",
        "pprls_cluster",
        "pprls_cluster_members",
        "pprls_mixing_time",
        "pprls_spherical_cap_volume",
    ] {
        assert!(header.contains(&format!("{f}(")), "{f} missing from header");
    }
}
