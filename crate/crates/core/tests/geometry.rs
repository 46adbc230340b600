use disasm_core::geometry::{convex_hulls_disjoint, point_triangle_distance, Aabb, ConvexHull, Mesh, Point, SdfGrid, Vec3};
use disasm_core::io::{parse_obj, write_obj};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cloud(rng: &mut ChaCha8Rng, n: usize, centre: Vec3) -> Vec<Point> {
    (0..n)
        .map(|_| Point::from(centre + Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))))
        .collect()
}

/// Barycentric coordinates of the origin in tetrahedron `t`, if it is not flat.
fn origin_weights(t: [Vec3; 4]) -> Option<[f64; 4]> {
    let m = nalgebra::Matrix3::from_columns(&[t[1] - t[0], t[2] - t[0], t[3] - t[0]]);
    if m.determinant().abs() < 1e-12 {
        return None;
    }
    let x = m.lu().solve(&(-t[0]))?;
    Some([1.0 - x.sum(), x[0], x[1], x[2]])
}

/// Whether the origin lies in the hull of `d`, within `slack`, by trying
/// every tetrahedron (Caratheodory).
fn origin_in_hull(d: &[Vec3], slack: f64) -> bool {
    let n = d.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                for l in k + 1..n {
                    if let Some(w) = origin_weights([d[i], d[j], d[k], d[l]]) {
                        if w.iter().all(|&x| x >= -slack) {
                            return true;
                        }
                    }
                }
            }
        }
    }
    false
}

#[test]
fn hull_separation_matches_minkowski_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut checked, mut disjoint) = (0, 0);
    for _ in 0..300 {
        let a = cloud(&mut rng, 5, Vec3::zeros());
        let off = Vec3::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
        let b = cloud(&mut rng, 5, off);
        let diff: Vec<Vec3> = a.iter().flat_map(|p| b.iter().map(move |q| p - q)).collect();
        let (tight, loose) = (origin_in_hull(&diff, -1e-6), origin_in_hull(&diff, 1e-6));
        if tight != loose {
            continue;
        }
        let (ha, hb) = (ConvexHull::from_points(&a).unwrap(), ConvexHull::from_points(&b).unwrap());
        assert_eq!(convex_hulls_disjoint(&ha, &hb), !tight, "a={a:?} b={b:?}");
        checked += 1;
        disjoint += !tight as usize;
    }
    assert!(checked > 250 && disjoint > 50 && checked - disjoint > 50, "{checked} {disjoint}");
}

#[test]
fn hull_contains_its_points_and_not_far_ones() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pts = cloud(&mut rng, 40, Vec3::zeros());
    let h = ConvexHull::from_points(&pts).unwrap();
    assert!(pts.iter().all(|p| h.contains(p, 1e-9)));
    assert!(!h.contains(&Point::new(1.8, 0.0, 0.0), 1e-9));
}

#[test]
fn touching_boxes_are_not_disjoint() {
    let a = Mesh::cuboid(&Aabb::from_corners([0.0; 3], [1.0; 3]));
    let b = Mesh::cuboid(&Aabb::from_corners([1.0, 0.0, 0.0], [2.0, 1.0, 1.0]));
    let c = Mesh::cuboid(&Aabb::from_corners([1.001, 0.0, 0.0], [2.0, 1.0, 1.0]));
    let hull = |m: &Mesh| ConvexHull::from_points(&m.vertices).unwrap();
    assert!(!convex_hulls_disjoint(&hull(&a), &hull(&b)));
    assert!(convex_hulls_disjoint(&hull(&a), &hull(&c)));
}

fn box_sdf(b: &Aabb, p: &Point) -> f64 {
    let q = (p - b.center()).abs() - b.extent() / 2.0;
    q.map(|x| x.max(0.0)).norm() + q.max().min(0.0)
}

#[test]
fn box_sdf_matches_analytic_distance() {
    let b = Aabb::from_corners([0.2, -0.5, 1.0], [1.7, 0.4, 1.6]);
    let sdf = SdfGrid::build(&Mesh::cuboid(&b), 64).unwrap();
    let h = sdf.spacing;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let region = b.expanded(0.5);
    let grid = sdf.bounds();
    let mut worst: f64 = 0.0;
    for _ in 0..4000 {
        let p = Point::new(
            rng.random_range(region.min.x..region.max.x),
            rng.random_range(region.min.y..region.max.y),
            rng.random_range(region.min.z..region.max.z),
        );
        let (got, want) = (sdf.query(&p), box_sdf(&b, &p));
        if grid.contains(&p) {
            worst = worst.max((got - want).abs());
        } else {
            assert!(got >= want - 0.5 * h, "{p:?}: {got} < {want}");
        }
    }
    assert!(worst < 0.5 * h, "worst {worst} spacing {h}");
}

#[test]
fn union_sdf_sign_is_right_away_from_the_surface() {
    let boxes = [Aabb::from_corners([0.0; 3], [2.0, 0.5, 1.0]), Aabb::from_corners([0.0, 0.5, 0.0], [0.5, 2.0, 1.0])];
    let sdf = SdfGrid::build(&Mesh::union_of_boxes(&boxes), 64).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut n = 0;
    for _ in 0..4000 {
        let p = Point::new(rng.random_range(-0.5..2.5), rng.random_range(-0.5..2.5), rng.random_range(-0.5..1.5));
        let d: Vec<f64> = boxes.iter().map(|b| box_sdf(b, &p)).collect();
        let inside = d.iter().any(|&x| x < 0.0);
        let outside_dist = d.iter().cloned().fold(f64::INFINITY, f64::min);
        if outside_dist.abs() < 2.0 * sdf.spacing {
            continue;
        }
        assert_eq!(sdf.query(&p) < 0.0, inside, "{p:?}");
        if !inside && sdf.bounds().contains(&p) {
            assert!((sdf.query(&p) - outside_dist).abs() < 0.5 * sdf.spacing, "{p:?}");
        }
        n += 1;
    }
    assert!(n > 2000);
}

#[test]
fn point_triangle_distance_matches_dense_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    const N: usize = 200;
    for _ in 0..100 {
        let t = cloud(&mut rng, 3, Vec3::zeros());
        let tri = [t[0], t[1], t[2]];
        let p = cloud(&mut rng, 1, Vec3::zeros())[0];
        let mut best = f64::INFINITY;
        for i in 0..=N {
            for j in 0..=N - i {
                let (u, v) = (i as f64 / N as f64, j as f64 / N as f64);
                let q = tri[0] + (tri[1] - tri[0]) * u + (tri[2] - tri[0]) * v;
                best = best.min((q - p).norm());
            }
        }
        let longest = (0..3).map(|k| (tri[k] - tri[(k + 1) % 3]).norm()).fold(0.0, f64::max);
        let d = point_triangle_distance(&p, &tri);
        assert!(d <= best + 1e-12 && best - d <= longest / N as f64, "exact {d} sampled {best}");
    }
}

#[test]
fn union_mesh_is_watertight_with_exact_volume() {
    let boxes = [Aabb::from_corners([0.0; 3], [2.0, 1.0, 1.0]), Aabb::from_corners([1.0, 0.0, 0.0], [3.0, 2.0, 1.5])];
    let m = Mesh::union_of_boxes(&boxes);
    m.check_watertight().unwrap();
    let inter = 1.0 * 1.0 * 1.0;
    assert!((m.signed_volume() - (2.0 + 6.0 - inter)).abs() < 1e-9);
    let cut = Mesh::boxes_minus(&boxes[..1], &[Aabb::from_corners([0.5, -1.0, 0.25], [1.0, 2.0, 0.75])]);
    cut.check_watertight().unwrap();
    assert!((cut.signed_volume() - (2.0 - 0.25)).abs() < 1e-9);
}

#[test]
fn obj_round_trip_is_bit_exact() {
    let m = Mesh::union_of_boxes(&[Aabb::from_corners([0.1, 0.2, 0.3], [1.0 / 3.0, 0.7, 2.0_f64.sqrt()])]);
    let back = parse_obj(&write_obj(&m)).unwrap();
    assert_eq!(back.vertices, m.vertices);
    assert_eq!(back.triangles, m.triangles);
    assert_eq!(write_obj(&back), write_obj(&m));
}
