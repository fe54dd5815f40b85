//! Symmetric composition schemes built from a second-order symmetric step.
//!
//! A scheme is a palindromic list of substep weights summing to one. Each
//! substep is one kick-drift-kick (classical) or potential-kinetic-potential
//! (quantum) Strang step of length `weight * dt`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Plain Strang splitting, second order.
    Strang,
    /// Yoshida triple jump, fourth order.
    #[default]
    Yoshida4,
    /// Yoshida seven-stage composition (solution A), sixth order.
    Yoshida6,
}

const CBRT2: f64 = 1.259_921_049_894_873_2;

impl Scheme {
    pub fn order(self) -> u32 {
        match self {
            Scheme::Strang => 2,
            Scheme::Yoshida4 => 4,
            Scheme::Yoshida6 => 6,
        }
    }

    pub fn weights(self) -> Vec<f64> {
        match self {
            Scheme::Strang => vec![1.0],
            Scheme::Yoshida4 => {
                let outer = 1.0 / (2.0 - CBRT2);
                let inner = -CBRT2 / (2.0 - CBRT2);
                vec![outer, inner, outer]
            }
            Scheme::Yoshida6 => {
                let w1 = -1.177_679_984_178_87;
                let w2 = 0.235_573_213_359_357;
                let w3 = 0.784_513_610_477_560;
                let w0 = 1.0 - 2.0 * (w1 + w2 + w3);
                vec![w3, w2, w1, w0, w1, w2, w3]
            }
        }
    }
}
