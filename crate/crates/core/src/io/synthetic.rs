//! Procedural benchmark assemblies built from axis-aligned boxes.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geometry::{Aabb, Mesh, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    BoltWasherPin,
    PegBoard,
    NestedBoxes,
    SlidingTrayStack,
    RotationHook,
}

impl Family {
    pub const ALL: [Family; 5] =
        [Family::BoltWasherPin, Family::PegBoard, Family::NestedBoxes, Family::SlidingTrayStack, Family::RotationHook];

    pub fn name(self) -> &'static str {
        match self {
            Family::BoltWasherPin => "bolt-washer-pin",
            Family::PegBoard => "peg-board",
            Family::NestedBoxes => "nested-boxes",
            Family::SlidingTrayStack => "sliding-tray-stack",
            Family::RotationHook => "rotation-hook",
        }
    }

    /// Supported part counts.
    pub fn part_range(self) -> (usize, usize) {
        match self {
            Family::BoltWasherPin => (3, 3),
            _ => (3, 9),
        }
    }

    pub fn default_parts(self) -> usize {
        match self {
            Family::BoltWasherPin | Family::RotationHook => 3,
            _ => 4,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL.into_iter().find(|f| f.name() == s).ok_or_else(|| SynthError::UnknownFamily(s.to_string()))
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("unknown family {0:?}")]
    UnknownFamily(String),
    #[error("{family} supports {min}..={max} parts, got {parts}")]
    PartCount { family: Family, parts: usize, min: usize, max: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticAssembly {
    pub name: String,
    pub family: Family,
    pub parts: Vec<(String, Mesh)>,
    /// A removal order known to work, by part id.
    pub expected_order: Vec<String>,
    /// Some part can only leave with a rotational motion.
    pub rotation_required: bool,
}

fn cuboid(lo: [f64; 3], hi: [f64; 3]) -> Aabb {
    Aabb::from_corners(lo, hi)
}

struct Builder {
    offset: Vec3,
    parts: Vec<(String, Mesh)>,
}

impl Builder {
    fn new(offset: Vec3) -> Self {
        Builder { offset, parts: Vec::new() }
    }

    fn part(&mut self, id: impl Into<String>, boxes: &[Aabb]) {
        let moved: Vec<Aabb> = boxes.iter().map(|b| b.translated(&self.offset)).collect();
        self.parts.push((id.into(), Mesh::union_of_boxes(&moved)));
    }
}

/// Random placement offset that keeps a scene of the given bounds inside
/// the unit-scale working cube.
fn placement(rng: &mut ChaCha8Rng, lo: [f64; 3], hi: [f64; 3]) -> Vec3 {
    let mut v = Vec3::zeros();
    for i in 0..3 {
        let free = (9.5 - (hi[i] - lo[i])).max(0.0);
        v[i] = 0.25 - lo[i] + rng.random_range(0.0..=free.min(0.5));
    }
    v
}

pub fn generate(family: Family, parts: usize, seed: u64) -> Result<SyntheticAssembly, SynthError> {
    let (min, max) = family.part_range();
    if parts < min || parts > max {
        return Err(SynthError::PartCount { family, parts, min, max });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut parts, expected_order, rotation_required) = match family {
        Family::BoltWasherPin => bolt_washer_pin(&mut rng),
        Family::PegBoard => peg_board(&mut rng, parts),
        Family::NestedBoxes => nested_boxes(&mut rng, parts),
        Family::SlidingTrayStack => sliding_tray_stack(&mut rng, parts),
        Family::RotationHook => rotation_hook(&mut rng, parts),
    };
    parts.shuffle(&mut rng);
    Ok(SyntheticAssembly {
        name: format!("{}-{}p-s{}", family.name(), parts.len(), seed),
        family,
        parts,
        expected_order: expected_order.into_iter().map(String::from).collect(),
        rotation_required,
    })
}

/// Bolt with a cross-drilled shaft, a cover sleeved over the shaft, and a
/// pin through the cross hole that keeps the cover on.
fn bolt_washer_pin(rng: &mut ChaCha8Rng) -> (Vec<(String, Mesh)>, Vec<&'static str>, bool) {
    let mut b = Builder::new(placement(rng, [-0.98, 0.0, -3.35], [0.98, 4.8, 3.35]));
    // Bolt: head, shaft split around the cross hole.
    b.part(
        "bolt",
        &[
            cuboid([-0.78, 0.0, -0.78], [0.78, 1.0, 0.78]),
            cuboid([-0.5, 1.0, -0.5], [0.5, 3.42, 0.5]),
            cuboid([-0.5, 4.18, -0.5], [0.5, 4.8, 0.5]),
            cuboid([-0.5, 3.42, -0.5], [-0.38, 4.18, 0.5]),
            cuboid([0.38, 3.42, -0.5], [0.5, 4.18, 0.5]),
        ],
    );
    // Cover: sleeve around the shaft, flange, and a pin channel at each end.
    let mut cover = vec![
        cuboid([-0.98, 1.03, -0.98], [-0.58, 3.22, 0.98]),
        cuboid([0.58, 1.03, -0.98], [0.98, 3.22, 0.98]),
        cuboid([-0.58, 1.03, -0.98], [0.58, 3.22, -0.58]),
        cuboid([-0.58, 1.03, 0.58], [0.58, 3.22, 0.98]),
    ];
    for s in [1.0, -1.0] {
        let z = |a: f64, c: f64| if s > 0.0 { (a, c) } else { (-c, -a) };
        let (f0, f1) = z(0.98, 3.35);
        cover.push(cuboid([-0.68, 1.03, f0], [0.68, 1.33, f1]));
        let (w0, w1) = z(1.4, 3.05);
        cover.push(cuboid([-0.68, 1.33, w0], [-0.38, 4.3, w1]));
        cover.push(cuboid([0.38, 1.33, w0], [0.68, 4.3, w1]));
        let (e0, e1) = z(3.05, 3.35);
        cover.push(cuboid([-0.68, 1.33, e0], [0.68, 4.3, e1]));
    }
    b.part("cover", &cover);
    b.part("pin", &[cuboid([-0.3, 3.5, -1.0], [0.3, 4.1, 1.0])]);
    (b.parts, vec!["pin", "cover", "bolt"], false)
}

/// Upside-down cups nested over a core block. Cup rims sit in grooves of
/// the base, and the core's foot runs in a T-slot under the base, so cups
/// leave strictly outer to inner before the core slides out along +X.
fn nested_boxes(rng: &mut ChaCha8Rng, parts: usize) -> (Vec<(String, Mesh)>, Vec<&'static str>, bool) {
    const CUPS: [&str; 7] = ["cup1", "cup2", "cup3", "cup4", "cup5", "cup6", "cup7"];
    let cups = parts - 2;
    let outer = |k: usize| 0.5 + 0.55 * k as f64;
    let top = |k: usize| 2.1 + 0.3 * (k - 1) as f64;
    let r = outer(cups) + 0.25;
    let mut b = Builder::new(placement(rng, [-r, -0.4, -r], [r, top(cups), r]));
    let off = b.offset;
    let ring = |lo: f64, hi: f64, y0: f64, y1: f64| -> [Aabb; 4] {
        [
            cuboid([-hi, y0, -hi], [-lo, y1, hi]),
            cuboid([lo, y0, -hi], [hi, y1, hi]),
            cuboid([-lo, y0, -hi], [lo, y1, -lo]),
            cuboid([-lo, y0, lo], [lo, y1, hi]),
        ]
    };
    let mut cuts = vec![cuboid([-0.5, -0.1, -0.5], [r + 0.1, 0.35, 0.5]), cuboid([-0.3, 0.35, -0.3], [r + 0.1, 0.9, 0.3])];
    for k in 1..=cups {
        cuts.extend(ring(outer(k) - 0.3, outer(k) + 0.1, 0.55, 0.9));
    }
    let moved = |v: &[Aabb]| v.iter().map(|x| x.translated(&off)).collect::<Vec<_>>();
    b.parts.push(("base".into(), Mesh::boxes_minus(&moved(&[cuboid([-r, -0.4, -r], [r, 0.8, r])]), &moved(&cuts))));
    b.part(
        "core",
        &[
            cuboid([-0.4, 0.0, -0.4], [0.4, 0.25, 0.4]),
            cuboid([-0.2, 0.25, -0.2], [0.2, 0.8, 0.2]),
            cuboid([-0.5, 0.8, -0.5], [0.5, 1.8, 0.5]),
        ],
    );
    for k in 1..=cups {
        let (a, t) = (outer(k), top(k));
        let mut boxes = ring(a - 0.2, a, 0.65, t).to_vec();
        boxes.push(cuboid([-a, t - 0.2, -a], [a, t, a]));
        b.part(CUPS[k - 1], &boxes);
    }
    let mut order: Vec<&'static str> = CUPS[..cups].iter().rev().copied().collect();
    order.extend(["core", "base"]);
    (b.parts, order, false)
}

/// Board with keyhole channels; each peg slides along +Z to the wide end
/// of its channel before it can lift out along +Y.
fn peg_board(rng: &mut ChaCha8Rng, parts: usize) -> (Vec<(String, Mesh)>, Vec<&'static str>, bool) {
    const NAMES: [&str; 8] = ["peg1", "peg2", "peg3", "peg4", "peg5", "peg6", "peg7", "peg8"];
    let pegs = parts - 1;
    let per_row = pegs.min(4);
    let rows = pegs.div_ceil(4);
    let width = 1.6 * per_row as f64;
    let depth = 3.5 * rows as f64;
    let mut b = Builder::new(placement(rng, [0.0; 3], [width, 2.2, depth]));
    let mut cuts = Vec::new();
    let mut pegs_boxes = Vec::new();
    for p in 0..pegs {
        let c = 0.8 + 1.6 * (p % per_row) as f64;
        let z0 = 0.5 + 3.5 * (p / per_row) as f64;
        cuts.push(cuboid([c - 0.5, 0.3, z0], [c + 0.5, 0.75, z0 + 2.5]));
        cuts.push(cuboid([c - 0.25, 0.75, z0], [c + 0.25, 1.3, z0 + 2.5]));
        cuts.push(cuboid([c - 0.5, 0.75, z0 + 1.5], [c + 0.5, 1.3, z0 + 2.5]));
        pegs_boxes.push([
            cuboid([c - 0.4, 0.35, z0 + 0.1], [c + 0.4, 0.7, z0 + 0.9]),
            cuboid([c - 0.15, 0.7, z0 + 0.35], [c + 0.15, 2.2, z0 + 0.65]),
        ]);
    }
    let off = b.offset;
    let moved = |v: &[Aabb]| v.iter().map(|x| x.translated(&off)).collect::<Vec<_>>();
    b.parts.push(("board".into(), Mesh::boxes_minus(&moved(&[cuboid([0.0; 3], [width, 1.2, depth])]), &moved(&cuts))));
    for (p, boxes) in pegs_boxes.iter().enumerate() {
        b.part(NAMES[p], boxes);
    }
    let mut order: Vec<&'static str> = NAMES[..pegs].to_vec();
    order.push("board");
    (b.parts, order, false)
}

/// Frame with grooved side walls holding trays that slide out along +Z,
/// locked by a front bar that lifts out along +Y.
fn sliding_tray_stack(rng: &mut ChaCha8Rng, parts: usize) -> (Vec<(String, Mesh)>, Vec<&'static str>, bool) {
    const NAMES: [&str; 7] = ["tray1", "tray2", "tray3", "tray4", "tray5", "tray6", "tray7"];
    let trays = parts - 2;
    let d = 3.0;
    let h = 0.5 + 0.8 * trays as f64;
    let mut b = Builder::new(placement(rng, [-2.4, 0.0, -0.3], [2.4, h + 0.3, d + 0.5]));
    let mut add = vec![
        cuboid([-2.4, 0.0, -0.3], [2.4, 0.3, d + 0.5]),
        cuboid([-2.4, 0.0, -0.3], [2.4, h, 0.0]),
        cuboid([-2.4, 0.0, -0.3], [-2.0, h, d + 0.5]),
        cuboid([2.0, 0.0, -0.3], [2.4, h, d + 0.5]),
    ];
    let mut cuts = Vec::new();
    for s in [1.0, -1.0] {
        let x = |a: f64, c: f64| if s > 0.0 { (a, c) } else { (-c, -a) };
        let (g0, g1) = x(1.99, 2.15);
        for i in 0..trays {
            let y = 0.5 + 0.8 * i as f64;
            cuts.push(cuboid([g0, y, 0.0], [g1, y + 0.3, d + 0.6]));
        }
        cuts.push(cuboid([g0, 0.3, d + 0.1], [g1, h + 0.1, d + 0.4]));
    }
    let off = b.offset;
    for a in add.iter_mut() {
        *a = a.translated(&off);
    }
    let cuts: Vec<Aabb> = cuts.iter().map(|c| c.translated(&off)).collect();
    b.parts.push(("frame".into(), Mesh::boxes_minus(&add, &cuts)));
    b.part("bar", &[cuboid([-2.1, 0.35, d + 0.15], [2.1, h + 0.3, d + 0.35])]);
    for (i, name) in NAMES.iter().enumerate().take(trays) {
        let y = 0.5 + 0.8 * i as f64;
        b.part(*name, &[cuboid([-2.1, y + 0.05, 0.05], [2.1, y + 0.25, d + 0.05])]);
    }
    let mut order = vec!["bar"];
    order.extend_from_slice(&NAMES[..trays]);
    order.push("frame");
    (b.parts, order, false)
}

/// Hollow frame whose roof slot only admits the rotor plate after a
/// quarter turn about +Y. A cap covers the slot; extra parts are blocks
/// stacked on the roof.
fn rotation_hook(rng: &mut ChaCha8Rng, parts: usize) -> (Vec<(String, Mesh)>, Vec<&'static str>, bool) {
    const NAMES: [&str; 6] = ["block1", "block2", "block3", "block4", "block5", "block6"];
    let blocks = parts - 3;
    let top = 2.85 + 0.6 * blocks as f64;
    let mut b = Builder::new(placement(rng, [-2.5, 0.0, -2.5], [2.5, top, 2.5]));
    let off = b.offset;
    let frame = Mesh::boxes_minus(
        &[cuboid([-2.5, 0.0, -2.5], [2.5, 2.5, 2.5]).translated(&off)],
        &[cuboid([-2.0, 1.0, -2.0], [2.0, 2.0, 2.0]).translated(&off), cuboid([-1.6, 1.9, -0.35], [1.6, 2.6, 0.35]).translated(&off)],
    );
    b.parts.push(("frame".into(), frame));
    b.part("rotor", &[cuboid([-0.3, 1.05, -1.5], [0.3, 1.45, 1.5])]);
    b.part("cap", &[cuboid([-1.8, 2.5, -0.6], [1.8, 2.8, 0.6])]);
    for (i, name) in NAMES.iter().enumerate().take(blocks) {
        let y = 2.5 + 0.6 * i as f64;
        b.part(*name, &[cuboid([1.2, y, 1.0], [2.2, y + 0.6, 2.0])]);
    }
    let mut order: Vec<&'static str> = NAMES[..blocks].iter().rev().copied().collect();
    order.extend(["cap", "rotor", "frame"]);
    (b.parts, order, true)
}
