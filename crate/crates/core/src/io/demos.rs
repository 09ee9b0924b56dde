//! Bundled worked examples, addressable by stable name.

use super::{items_from_text, Command, InputItem};

#[derive(Clone, Copy, Debug)]
pub struct Demo {
    pub name: &'static str,
    pub command: Command,
    pub description: &'static str,
    pub json: &'static str,
}

impl Demo {
    pub fn items(&self) -> Vec<InputItem> {
        items_from_text(self.name, self.json)
    }
}

macro_rules! demo {
    ($name:literal, $cmd:expr, $desc:literal) => {
        Demo { name: $name, command: $cmd, description: $desc, json: include_str!(concat!("../../demos/", $name, ".json")) }
    };
}

pub const DEMOS: &[Demo] = &[
    demo!("jordan_pair_a", Command::Psig, "[[1,t],[t,t^3]] at 0: sigma (0,-1), no jump"),
    demo!("jordan_pair_b", Command::Psig, "[[1,t^2],[t^2,t^3]] at 0: sigma (0,0,1), jump +1"),
    demo!("degenerate_counterexample", Command::Psig, "degenerate conjugate instant: sigma (0,0,-1), flow -1"),
    demo!("half_turn", Command::Maslov, "line turning once through the projective line: index -1"),
    demo!("graph_path_end", Command::Maslov, "graph path ending on the cycle with table (0,-1): index 1"),
    demo!("standard_triple", Command::Triple, "x-axis, diagonal, y-axis: tau = 1"),
    demo!("standard_triple_odd", Command::Triple, "transposed standard triple: tau = -1"),
    demo!("repeated_pair", Command::Hormander, "four-fold index with equal first pair: q = 0"),
    demo!("rotation_loop", Command::Cz, "full rotation loop exp(tJ) on [0, 2 pi]"),
    demo!("flat", Command::Geodesic, "flat metric: indices (0,0,0)"),
    demo!("sphere_like", Command::Geodesic, "g = I, R = -(2.5 pi)^2 I: indices (4,4,4)"),
    demo!("round_final", Command::Geodesic, "g = I, R = -pi^2 I, conjugate at t = 1: indices (2,2,2)"),
    demo!("lorentz_diag", Command::Geodesic, "indefinite diagonal metric with a timelike instant: indices (1,1,1)"),
];

pub fn demo(name: &str) -> Option<&'static Demo> {
    DEMOS.iter().find(|d| d.name == name)
}
