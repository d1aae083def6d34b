use nalgebra::Matrix3;
use shadowkit::evalkit::{
    select_counterpart, warp_homography, warp_homography_into, Correspondence, Homography,
};
use shadowkit::synthetic::synthetic_face;

fn corners(n: f64) -> Vec<[f64; 2]> {
    vec![
        [0.2 * n, 0.2 * n],
        [0.8 * n, 0.25 * n],
        [0.75 * n, 0.8 * n],
        [0.25 * n, 0.75 * n],
        [0.5 * n, 0.5 * n],
        [0.4 * n, 0.3 * n],
    ]
}

#[test]
fn misaligned_capture_finds_its_lit_frame() {
    let n = 96usize;
    let frames: Vec<_> = (0..4).map(|s| synthetic_face(40 + s, n)).collect();
    let truth = 2;
    // the "shadowed" capture is frame 2 seen through a small perspective change
    let h = Homography::new(Matrix3::new(
        1.02, 0.03, -2.0, -0.02, 0.99, 1.5, 1e-4, 5e-5, 1.0,
    ))
    .unwrap();
    let capture = warp_homography(&frames[truth], &h).unwrap();
    let to_frame = h.inverse().unwrap();
    let corr: Vec<Correspondence> = corners(n as f64)
        .into_iter()
        .map(|p| (p, to_frame.apply(p).unwrap()))
        .collect();
    let picked = select_counterpart(&capture, &frames, &vec![corr; frames.len()]).unwrap();
    assert_eq!(picked.index, truth);
    assert!(picked.fits.iter().all(|f| f.rms < 1e-6));
    let aligned = warp_homography_into(&capture, &picked.fits[truth].homography, n, n).unwrap();
    assert!(picked.errors[truth] < 0.02);
    assert_eq!(aligned.dims(), (n, n));
}
