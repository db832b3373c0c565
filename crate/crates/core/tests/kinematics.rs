use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rtcd::assets::arm7;
use rtcd::geometry::{Iso3, Point3, Vec3};
use rtcd::kinematics::{
    forward_kinematics_batch, halton, interpolate_cspace, sample_halton, sample_trajectory_pairs, sphere_centers, Joint,
    LinkSpec, RobotModel, Sphere,
};
use rtcd::mesh::shapes;

fn planar_arm(l1: f64, l2: f64) -> RobotModel {
    let cube = || shapes::centered_box(Vec3::repeat(0.01), [1, 1, 1]);
    let lim = std::f64::consts::PI;
    let link = |name: &str, parent, joint| LinkSpec {
        name: name.into(),
        parent,
        joint,
        mesh: cube(),
        spheres: vec![Sphere::new(Point3::origin(), 0.02)],
    };
    RobotModel::new(vec![
        link("upper", None, Joint::revolute(Iso3::identity(), Vec3::z(), -lim, lim)),
        link("lower", Some(0), Joint::revolute(Iso3::translation(l1, 0.0, 0.0), Vec3::z(), -lim, lim)),
        link("tip", Some(1), Joint::fixed(Iso3::translation(l2, 0.0, 0.0))),
    ])
    .unwrap()
}

#[test]
fn planar_arm_matches_closed_form() {
    let (l1, l2) = (0.7, 0.4);
    let robot = planar_arm(l1, l2);
    let configs = sample_halton(200, &robot, 0).unwrap();
    let poses = forward_kinematics_batch(&robot, &configs).unwrap();
    for (c, q) in configs.iter().enumerate() {
        let tip = poses.get(c, 2).translation.vector;
        let x = l1 * q[0].cos() + l2 * (q[0] + q[1]).cos();
        let y = l1 * q[0].sin() + l2 * (q[0] + q[1]).sin();
        assert!((tip - Vec3::new(x, y, 0.0)).norm() < 1e-12);
        let heading = poses.get(c, 2).rotation * Vec3::x();
        let a = q[0] + q[1];
        assert!((heading - Vec3::new(a.cos(), a.sin(), 0.0)).norm() < 1e-12);
    }
}

#[test]
fn batch_matches_single_configuration_kinematics() {
    let robot = arm7();
    let configs = sample_halton(300, &robot, 17).unwrap();
    let batch = forward_kinematics_batch(&robot, &configs).unwrap();
    for (c, q) in configs.iter().enumerate() {
        let single = robot.forward_kinematics(q).unwrap();
        assert_eq!(batch.config(c), single.as_slice());
    }
    let spheres = sphere_centers(&batch, &robot);
    let local: Vec<(usize, Sphere)> = robot.links().iter().enumerate().flat_map(|(l, link)| link.spheres.iter().map(move |s| (l, *s))).collect();
    for (c, world) in spheres.iter().enumerate() {
        assert_eq!(world.len(), 62);
        for ((l, s), w) in local.iter().zip(world) {
            assert!((batch.get(c, *l) * s.center - w.center).norm() < 1e-12);
            assert_eq!(s.radius, w.radius);
        }
    }
}

#[test]
fn invalid_configurations_are_rejected() {
    let robot = arm7();
    assert!(forward_kinematics_batch(&robot, &[vec![0.0; 6]]).is_err());
    assert!(forward_kinematics_batch(&robot, &[vec![10.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]]).is_err());
    assert!(forward_kinematics_batch(&robot, &[vec![f64::NAN; 7]]).is_err());
}

/// Largest gap between the empirical and uniform measure over anchored boxes on a grid.
fn star_discrepancy(points: &[[f64; 2]]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 1..=32 {
        for j in 1..=32 {
            let (x, y) = (i as f64 / 32.0, j as f64 / 32.0);
            let inside = points.iter().filter(|p| p[0] < x && p[1] < y).count();
            worst = worst.max((inside as f64 / points.len() as f64 - x * y).abs());
        }
    }
    worst
}

#[test]
fn halton_is_more_uniform_than_random() {
    let n = 1024;
    let h: Vec<[f64; 2]> = (1..=n as u64).map(|i| {
        let v = halton(i, 2);
        [v[0], v[1]]
    }).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let r: Vec<[f64; 2]> = (0..n).map(|_| [rng.random(), rng.random()]).collect();
    let (dh, dr) = (star_discrepancy(&h), star_discrepancy(&r));
    assert!(dh < 0.01, "halton discrepancy {dh}");
    assert!(dh < dr, "halton {dh} vs random {dr}");
}

#[test]
fn halton_samples_respect_limits_and_seed() {
    let robot = arm7();
    let a = sample_halton(500, &robot, 0).unwrap();
    for q in &a {
        for (v, (lo, hi)) in q.iter().zip(robot.joint_limits()) {
            assert!((lo..=hi).contains(v));
        }
    }
    let shifted = sample_halton(10, &robot, 5).unwrap();
    assert_eq!(shifted[0], a[5]);
    assert!(sample_halton(0, &robot, 0).is_err());
}

#[test]
fn trajectory_pairs_are_bounded() {
    let robot = arm7();
    for step in [0.1, 0.8] {
        for (s, e) in sample_trajectory_pairs(200, &robot, 3, step).unwrap() {
            for ((a, b), (lo, hi)) in s.iter().zip(&e).zip(robot.joint_limits()) {
                assert!((a - b).abs() <= step + 1e-12);
                assert!((lo..=hi).contains(b));
            }
        }
    }
    let free = sample_trajectory_pairs(50, &robot, 3, f64::INFINITY).unwrap();
    assert!(free.iter().any(|(s, e)| (s[0] - e[0]).abs() > 1.0));
}

proptest! {
    #[test]
    fn interpolation_hits_endpoints_and_is_monotone(a in -3.0..3.0f64, b in -3.0..3.0f64, n in 2usize..50) {
        let path = interpolate_cspace(&[a, -a], &[b, -b], n).unwrap();
        prop_assert_eq!(path.len(), n);
        prop_assert_eq!(&path[0], &vec![a, -a]);
        prop_assert_eq!(&path[n - 1], &vec![b, -b]);
        for w in path.windows(2) {
            prop_assert!((w[1][0] - w[0][0]) * (b - a) >= 0.0);
        }
    }

    /// Link poses stay rigid: distance between the base and any link origin depends
    /// only on joints between them, so it is invariant to the first joint.
    #[test]
    fn first_joint_rotation_preserves_distances(q0 in -2.8..2.8f64, rest in proptest::collection::vec(-1.5..1.5f64, 6)) {
        let robot = arm7();
        let mut q = vec![0.0];
        q.extend(&rest);
        let mut p = vec![q0];
        p.extend(&rest);
        let a = robot.forward_kinematics(&q).unwrap();
        let b = robot.forward_kinematics(&p).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x.translation.vector.norm() - y.translation.vector.norm()).abs() < 1e-12);
            prop_assert!((x.translation.vector.z - y.translation.vector.z).abs() < 1e-12);
        }
    }
}
