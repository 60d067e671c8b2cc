use std::path::Path;

use ocrflow_core::backend::{
    map_polygon, preprocess, Backend, MockBackend, MockScene, ModelRef, ModelSpec, OutputRole, RasterImage, ResizePolicy,
};
use ocrflow_core::geometry::{min_area_rect, Point, Polygon};
use ocrflow_core::pipeline::{build_pipeline, crop_region, load_config, PipelineError, Registry};
use proptest::prelude::*;

fn policy() -> impl Strategy<Value = (ResizePolicy, Option<usize>, Option<usize>)> {
    prop_oneof![
        Just((ResizePolicy::None, None, None)),
        (prop::option::of(8..200usize), prop::option::of(8..200usize)).prop_map(|(h, w)| (ResizePolicy::Stretch, h, w)),
        (8..200usize, 8..200usize).prop_map(|(h, w)| (ResizePolicy::FitPad, Some(h), Some(w))),
    ]
}

fn detection_spec(resize: ResizePolicy, h: Option<usize>, w: Option<usize>) -> ModelSpec {
    let mut spec = ModelSpec::with_roles(&[OutputRole::ProbMap]);
    spec.input.resize = resize;
    spec.input.height = h;
    spec.input.width = w;
    spec
}

fn scene(shapes: &[String]) -> MockScene {
    MockScene::Detection { shapes: shapes.to_vec(), kernels: 3, kernel_shrink: 0.5, similarity_dim: 4 }
}

proptest! {
    #[test]
    fn content_corners_round_trip((resize, th, tw) in policy(), h in 4..300usize, w in 4..300usize) {
        let image = RasterImage::filled(h, w, 3, 128).unwrap();
        let (tensor, rec) = preprocess(&image, &detection_spec(resize, th, tw)).unwrap();
        prop_assert_eq!(tensor.shape(), &[1, 3, rec.input_height, rec.input_width]);
        prop_assert!(rec.content_height <= rec.input_height && rec.content_width <= rec.input_width);

        let content = Polygon::rect(0.0, 0.0, rec.content_width as f64, rec.content_height as f64).unwrap();
        let mapped = map_polygon(&content, &rec).unwrap();
        let (lo, hi) = mapped.bounds();
        prop_assert!(lo.x.abs() <= 0.5 && lo.y.abs() <= 0.5);
        prop_assert!((hi.x - w as f64).abs() <= 0.5 && (hi.y - h as f64).abs() <= 0.5);
        for p in [Point::new(0.0, 0.0), Point::new(w as f64, h as f64), Point::new(w as f64 / 3.0, h as f64 / 7.0)] {
            let back = rec.to_original(rec.to_input(p));
            prop_assert!((back - p).norm() <= 0.5);
        }
    }

    #[test]
    fn mock_output_is_a_pure_function(
        rects in prop::collection::vec((0..60u32, 0..60u32, 2..30u32, 2..30u32, 1..10u32), 0..4),
        h in 8..96usize,
        w in 8..96usize,
    ) {
        let shapes: Vec<String> =
            rects.iter().map(|(x, y, rw, rh, p)| format!("rect({x},{y},{rw},{rh},p=0.{p})")).collect();
        let roles = [OutputRole::ProbMap, OutputRole::KernelStack, OutputRole::Similarity];
        let a = MockBackend::new(ModelSpec::with_roles(&roles), &scene(&shapes), None).unwrap();
        let b = MockBackend::new(ModelSpec::with_roles(&roles), &scene(&shapes), None).unwrap();
        let input = preprocess(&RasterImage::filled(h, w, 3, 7).unwrap(), a.spec()).unwrap().0;
        let other = preprocess(&RasterImage::filled(h, w, 3, 250).unwrap(), a.spec()).unwrap().0;
        let first = a.forward(&input).unwrap();
        prop_assert_eq!(&first, &a.forward(&input).unwrap());
        prop_assert_eq!(&first, &b.forward(&other).unwrap());
    }

    #[test]
    fn crop_matches_rounded_min_rect(
        (cx, cy) in (20.0..80.0f64, 20.0..80.0f64),
        (len, thick) in (1.0..40.0f64, 0.3..15.0f64),
        theta in 0.0..std::f64::consts::PI,
    ) {
        let image = RasterImage::filled(100, 100, 3, 90).unwrap();
        let (u, v) = (Point::new(theta.cos(), theta.sin()), Point::new(-theta.sin(), theta.cos()));
        let c = Point::new(cx, cy);
        let (a, b) = (u * (len / 2.0), v * (thick / 2.0));
        let poly = Polygon::new(vec![c - a - b, c + a - b, c + a + b, c - a + b]).unwrap();
        let rect = min_area_rect(poly.vertices()).unwrap();
        let crop = crop_region(&image, &poly).unwrap();
        let long = rect.width.max(rect.height);
        let short = rect.width.min(rect.height);
        prop_assert_eq!(crop.width(), (long.round() as usize).max(1));
        prop_assert_eq!(crop.height(), (short.round() as usize).max(1));
        prop_assert!(crop.width() >= crop.height());
    }
}

#[test]
fn missing_output_role_fails_at_build() {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/e2e_mock.json");
    let mut config = load_config(&fixture).unwrap();
    let det = config.stages.detector.as_mut().unwrap();
    det.algorithm = "psenet".into();
    let ModelRef::Mock(mock) = &mut det.model else { panic!("fixture uses a mock detector") };
    mock.spec = Some(ModelSpec::with_roles(&[OutputRole::ProbMap]));
    match build_pipeline(&config, &Registry::default()).err().unwrap() {
        PipelineError::Config { key, message } => {
            assert_eq!(key, "stages.detector.model");
            assert!(message.contains("KernelStack"), "{message}");
        }
        other => panic!("expected a config error, got {other}"),
    }
}
