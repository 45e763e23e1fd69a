//! Slice-matching maps, P-compatible maps, the slice-matching operator and
//! the iterative scheme.

mod compatible;
mod iterate;
mod maps;

pub use compatible::{compatible_residual, CompatibleMap, PiecewiseLinear};
pub use iterate::{iterate, IterateOptions, IterationRecord, IterationTrace, Sampler, StepRule, StepSchedule};
pub use maps::{
    apply_operator, map_distance, matrix_slice_map, single_slice_map, sliced_residual, MatrixSliceMap,
    SingleSliceMap,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{Direction, DiscreteMeasure, FnMap, PointMap};
    use crate::ot1d::ot_map_1d;
    use crate::slicing::{sample_haar_orthogonal, stream_rng, OrthoMatrix};
    use rand::Rng;

    fn cloud(seed: u64, m: usize, n: usize) -> DiscreteMeasure {
        let mut rng = stream_rng(seed, 0, 0);
        DiscreteMeasure::uniform_flat(n, (0..m * n).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap()
    }

    fn shifted(s: &DiscreteMeasure, a: f64, b: &[f64]) -> DiscreteMeasure {
        let b = b.to_vec();
        s.pushforward(&FnMap::new(s.dim(), move |x: &[f64]| {
            x.iter().zip(&b).map(|(xi, bi)| a * xi + bi).collect()
        }))
        .unwrap()
    }

    fn max_err(s: &DiscreteMeasure, f: &impl PointMap, g: impl Fn(&[f64]) -> Vec<f64>) -> f64 {
        s.points()
            .flat_map(|x| {
                let fx = f.apply(x).unwrap();
                let gx = g(x);
                fx.into_iter().zip(gx).map(|(a, b)| (a - b).abs()).collect::<Vec<_>>()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn single_slice_identity_when_target_equals_source() {
        let s = cloud(1, 10, 3);
        let t = single_slice_map(&s, &s, &Direction::normalized(vec![1.0, 2.0, -1.0]).unwrap()).unwrap();
        assert!(max_err(&s, &t, |x| x.to_vec()) < 1e-12);
    }

    #[test]
    fn single_slice_shift_moves_along_theta_only() {
        let s = cloud(2, 12, 2);
        let b = [1.5, -0.7];
        let mu = shifted(&s, 1.0, &b);
        let theta = Direction::normalized(vec![0.3, 0.9]).unwrap();
        let t = single_slice_map(&s, &mu, &theta).unwrap();
        let th = theta.as_slice().to_vec();
        let proj = b[0] * th[0] + b[1] * th[1];
        assert!(max_err(&s, &t, |x| vec![x[0] + th[0] * proj, x[1] + th[1] * proj]) < 1e-12);
    }

    #[test]
    fn single_slice_in_one_dimension_is_the_1d_map() {
        let s = cloud(3, 9, 1);
        let mu = cloud(4, 9, 1);
        let t = single_slice_map(&s, &mu, &Direction::axis(1, 0)).unwrap();
        let t1 = ot_map_1d(&s, &mu).unwrap();
        for x in [-3.0, -0.1, 0.0, 0.4, 5.0] {
            assert!((t.eval(&[x])[0] - t1.eval(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn matrix_slice_recovers_scale_shift_for_any_basis() {
        let s = cloud(5, 20, 3);
        let mu = shifted(&s, 1.6, &[-3.5, 2.0, 0.25]);
        for k in 0..5 {
            let p = sample_haar_orthogonal(&mut stream_rng(11, 0, k), 3);
            let t = matrix_slice_map(&s, &mu, &p).unwrap();
            assert!(max_err(&s, &t, |x| vec![1.6 * x[0] - 3.5, 1.6 * x[1] + 2.0, 1.6 * x[2] + 0.25]) < 1e-12);
        }
    }

    #[test]
    fn matrix_slice_recovers_axis_compatible_map() {
        let s = cloud(6, 16, 2);
        let cubicish = PiecewiseLinear::new(vec![(-3.0, -20.0), (-1.0, -1.5), (0.0, 0.0), (1.0, 1.0), (3.0, 27.0)]).unwrap();
        let affine = PiecewiseLinear::affine(0.5, 1.0).unwrap();
        let t = CompatibleMap::new(OrthoMatrix::identity(2), vec![cubicish, affine]).unwrap();
        let mu = s.pushforward(&t).unwrap();
        let recovered = matrix_slice_map(&s, &mu, &OrthoMatrix::identity(2)).unwrap();
        assert!(max_err(&s, &recovered, |x| t.eval(x)) < 1e-10);
    }

    #[test]
    fn operator_reproduces_source_and_scaled_target() {
        let s = cloud(7, 15, 2);
        let p = OrthoMatrix::rotation_2d(0.4);
        let u = apply_operator(&s, &s, &p).unwrap();
        assert!(u.flat_points().iter().zip(s.flat_points()).all(|(a, b)| (a - b).abs() < 1e-12));

        let mu = shifted(&s, 2.0, &[1.0, -1.0]);
        let u = apply_operator(&s, &mu, &p).unwrap();
        assert!(u.flat_points().iter().zip(mu.flat_points()).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn sliced_residual_of_shift_is_shift_norm() {
        let s = cloud(8, 11, 3);
        let b = [0.5, -2.0, 1.0];
        let mu = shifted(&s, 1.0, &b);
        let p = sample_haar_orthogonal(&mut stream_rng(8, 0, 0), 3);
        assert!(sliced_residual(&s, &s, &p).unwrap() == 0.0);
        assert!((sliced_residual(&s, &mu, &p).unwrap() - 5.25).abs() < 1e-12);
    }

    #[test]
    fn compatible_residual_edge_cases() {
        let s = cloud(9, 10, 2);
        let mu = cloud(10, 10, 2);
        let p = OrthoMatrix::rotation_2d(1.1);
        let id = CompatibleMap::new(p.clone(), vec![PiecewiseLinear::identity(), PiecewiseLinear::identity()]).unwrap();
        let base = sliced_residual(&s, &mu, &p).unwrap();
        assert!((compatible_residual(&s, &mu, &id, &p).unwrap() - base).abs() < 1e-12);

        let other = OrthoMatrix::rotation_2d(1.2);
        assert!(compatible_residual(&s, &mu, &id, &other).is_err());
    }

    #[test]
    fn compatible_eval_examples() {
        let id = CompatibleMap::new(OrthoMatrix::identity(2), vec![PiecewiseLinear::identity(); 2]).unwrap();
        assert_eq!(id.eval(&[0.3, -4.0]), vec![0.3, -4.0]);

        let t = CompatibleMap::new(
            OrthoMatrix::identity(2),
            vec![PiecewiseLinear::affine(2.0, 0.0).unwrap(), PiecewiseLinear::affine(1.0, 1.0).unwrap()],
        )
        .unwrap();
        assert_eq!(t.eval(&[3.0, 5.0]), vec![6.0, 6.0]);
    }

    #[test]
    fn piecewise_linear_extrapolates_end_slopes() {
        let f = PiecewiseLinear::new(vec![(0.0, 0.0), (1.0, 2.0), (2.0, 3.0)]).unwrap();
        assert_eq!(f.eval(-1.0), -2.0);
        assert_eq!(f.eval(0.5), 1.0);
        assert_eq!(f.eval(1.5), 2.5);
        assert_eq!(f.eval(4.0), 5.0);
        assert!(PiecewiseLinear::new(vec![(0.0, 0.0), (1.0, 0.0)]).is_err());
        assert!(PiecewiseLinear::new(vec![(0.0, 0.0)]).is_err());
    }

    #[test]
    fn schedule_parsing() {
        assert_eq!("const:1.0".parse::<StepRule>().unwrap(), StepRule::Constant(1.0));
        assert_eq!("harmonic:0.5".parse::<StepRule>().unwrap(), StepRule::Harmonic(0.5));
        assert!("const:0".parse::<StepRule>().is_err());
        assert!("const:1.5".parse::<StepRule>().is_err());
        assert!("linear:0.5".parse::<StepRule>().is_err());
        assert!("0.5".parse::<StepRule>().is_err());
        let s = StepSchedule::new(StepRule::Harmonic(1.0), 10).unwrap();
        assert_eq!(s.gamma(0), 1.0);
        assert_eq!(s.gamma(3), 0.25);
    }

    #[test]
    fn iterate_stops_immediately_on_matched_input() {
        let s = cloud(12, 8, 2);
        let schedule = StepSchedule::new(StepRule::Constant(1.0), 10).unwrap();
        for sampler in [Sampler::HaarMatrix, Sampler::UniformDirection] {
            let (trace, last) = iterate(&s, &s, &schedule, sampler, 3, &IterateOptions::default()).unwrap();
            assert_eq!(trace.len(), 1);
            assert_eq!(trace.records[0].sliced_residual, 0.0);
            assert_eq!(last, s);
        }
    }

    #[test]
    fn iterate_recovers_scale_shift_in_one_step() {
        let s = cloud(13, 24, 3);
        let mu = shifted(&s, 0.5, &[3.0, 1.0, -2.0]);
        let schedule = StepSchedule::new(StepRule::Constant(1.0), 5).unwrap();
        let (trace, _) = iterate(&s, &mu, &schedule, Sampler::HaarMatrix, 21, &IterateOptions::default()).unwrap();
        assert_eq!(trace.len(), 2);
        assert!(trace.records[0].sliced_residual > 1.0);
        assert!(trace.records[1].sliced_residual < 1e-10);
    }

    #[test]
    fn iterate_with_damped_steps_keeps_trace_bounded() {
        let s = cloud(14, 10, 2);
        let mu = cloud(15, 10, 2);
        let schedule = StepSchedule::new(StepRule::Harmonic(0.8), 6).unwrap();
        let opts = IterateOptions {
            record_w2_exact: true,
            ..Default::default()
        };
        let (trace, _) = iterate(&s, &mu, &schedule, Sampler::HaarMatrix, 5, &opts).unwrap();
        assert!(trace.len() <= 7);
        assert!(trace.records.iter().all(|r| r.sliced_residual >= 0.0 && r.w2_exact.is_some()));
        let text = trace.to_json_lines();
        assert_eq!(IterationTrace::from_json_lines(&text).unwrap(), trace);
        assert!(text.lines().next().unwrap().starts_with("{\"k\":0,\"gamma\":0.8,"));
    }
}
