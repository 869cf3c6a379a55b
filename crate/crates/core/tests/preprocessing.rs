use fundus_core::dataset::{draw_scene, render_fundus};
use fundus_core::fov::{detect_fov, FovConfig};
use fundus_core::imaging::{intensity_plane, FundusImage};
use fundus_core::pipeline::{preprocess, PreprocessConfig};

fn black_padded(img: &FundusImage, pad_x: usize, pad_y: usize) -> FundusImage {
    FundusImage::from_fn(img.width() + 2 * pad_x, img.height() + 2 * pad_y, |x, y| {
        if x < pad_x || y < pad_y || x >= img.width() + pad_x || y >= img.height() + pad_y {
            [0, 0, 0]
        } else {
            img.get(x - pad_x, y - pad_y)
        }
    })
    .unwrap()
}

#[test]
fn detected_fov_follows_the_image_when_padded() {
    let scene = draw_scene(21, 0, 200);
    let img = render_fundus(&scene, None);
    let base = detect_fov(&img, &FovConfig::default()).unwrap();
    let shifted = detect_fov(&black_padded(&img, 40, 10), &FovConfig::default()).unwrap();
    assert!((shifted.cx - base.cx - 40.0).abs() < 0.5, "{shifted:?} vs {base:?}");
    assert!((shifted.cy - base.cy - 10.0).abs() < 0.5);
    assert!((shifted.a - base.a).abs() < 0.5 && (shifted.b - base.b).abs() < 0.5);
    assert!((base.cx - scene.fov.cx).abs() < 2.0 && (base.cy - scene.fov.cy).abs() < 2.0);
}

#[test]
fn preprocessed_output_is_square_masked_and_spans_full_range() {
    let img = render_fundus(&draw_scene(22, 1, 240), None);
    let out = preprocess(&black_padded(&img, 60, 0), &PreprocessConfig { size: 96, ..PreprocessConfig::default() }).unwrap();
    assert_eq!((out.image.width(), out.image.height()), (96, 96));
    // corners fall outside the inscribed disc
    for (x, y) in [(0, 0), (95, 0), (0, 95), (95, 95)] {
        assert_eq!(out.image.get(x, y), [0, 0, 0]);
    }
    let plane = intensity_plane(&out.image);
    let max = plane.values().iter().copied().max().unwrap();
    assert!(max >= 250, "equalized maximum {max}");
    assert!(out.image.get(48, 48).iter().any(|&c| c > 0));
}

#[test]
fn blank_image_has_no_field_of_view() {
    let img = FundusImage::filled(64, 64, [0, 0, 0]).unwrap();
    assert!(detect_fov(&img, &FovConfig::default()).is_err());
    assert!(preprocess(&img, &PreprocessConfig::default()).is_err());
}
