use shadowkit::symmetry::{apply_warp, asymmetry, concat_mirrored, warp_field, DEFAULT_K_SIGMA};
use shadowkit::synthetic::{face_landmarks, synthetic_face};
use shadowkit::ImageBuf;

const SIZE: usize = 128;

fn in_disc(x: usize, y: usize) -> bool {
    let (cx, cy, r) = (0.36 * SIZE as f64, 0.56 * SIZE as f64, 0.08 * SIZE as f64);
    (x as f64 + 0.5 - cx).powi(2) + (y as f64 + 0.5 - cy).powi(2) < r * r
}

fn shadowed(face: &ImageBuf) -> ImageBuf {
    ImageBuf::from_fn(SIZE, SIZE, |x, y| {
        let p = face.pixel(x, y);
        if in_disc(x, y) {
            p.map(|v| v * 0.35)
        } else {
            p
        }
    })
    .unwrap()
}

#[test]
fn one_sided_shadow_shows_up_only_where_it_and_its_mirror_fall() {
    let face = synthetic_face(21, SIZE);
    let shadow = shadowed(&face);
    let field = warp_field(SIZE, SIZE, &face_landmarks(SIZE), DEFAULT_K_SIGMA).unwrap();
    let base = asymmetry(&face, &apply_warp(&face, &field).unwrap()).unwrap();
    let with = asymmetry(&shadow, &apply_warp(&shadow, &field).unwrap()).unwrap();

    // a pixel is affected if it is shadowed or reads from a shadowed pixel
    let reads_shadow = |x: usize, y: usize| {
        let [tx, ty] = field.target(x, y);
        let (fx, fy) = ((tx - 0.5).floor(), (ty - 0.5).floor());
        [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]
            .iter()
            .any(|(dx, dy)| {
                let sx = (fx + dx).clamp(0.0, SIZE as f64 - 1.0) as usize;
                let sy = (fy + dy).clamp(0.0, SIZE as f64 - 1.0) as usize;
                in_disc(sx, sy)
            })
    };

    let (mut inside_change, mut mirrored_change, mut inside_n, mut mirrored_n) = (0.0, 0.0, 0, 0);
    for y in 0..SIZE {
        for x in 0..SIZE {
            let delta: f32 = (0..3)
                .map(|c| (with.pixel(x, y)[c] - base.pixel(x, y)[c]).abs())
                .sum();
            if in_disc(x, y) {
                inside_change += delta;
                inside_n += 1;
            } else if reads_shadow(x, y) {
                mirrored_change += delta;
                mirrored_n += 1;
            } else {
                assert_eq!(
                    delta, 0.0,
                    "pixel ({x}, {y}) changed outside the shadow and its mirror"
                );
            }
        }
    }
    assert!(inside_n > 0 && mirrored_n > 0);
    assert!(inside_change / inside_n as f32 > 0.1);
    assert!(mirrored_change / mirrored_n as f32 > 0.05);

    // the mirrored shadow lands on the opposite cheek
    let mirrored_cols: Vec<usize> = (0..SIZE)
        .flat_map(|y| (0..SIZE).map(move |x| (x, y)))
        .filter(|&(x, y)| !in_disc(x, y) && reads_shadow(x, y))
        .map(|(x, _)| x)
        .collect();
    let mean_col = mirrored_cols.iter().sum::<usize>() as f64 / mirrored_cols.len() as f64;
    assert!(
        (mean_col - 0.64 * SIZE as f64).abs() < 0.05 * SIZE as f64,
        "{mean_col}"
    );
}

#[test]
fn six_channel_input_keeps_both_images() {
    let face = synthetic_face(2, 48);
    let field = warp_field(48, 48, &face_landmarks(48), DEFAULT_K_SIGMA).unwrap();
    let mirrored = apply_warp(&face, &field).unwrap();
    let stack = concat_mirrored(&face, &mirrored).unwrap();
    assert_eq!(
        (stack.width(), stack.height(), stack.channels()),
        (48, 48, 6)
    );
    assert_eq!(stack.get(10, 20, 1), face.pixel(10, 20)[1]);
    assert_eq!(stack.get(10, 20, 4), mirrored.pixel(10, 20)[1]);
}
