#![allow(dead_code)]

use num_rational::Ratio;
use rand::Rng;
use superframe::exact::{ExactInstance, InstanceNode};
use superframe::model::EnergyConstants;
use superframe::{Exact, Field};

fn r(n: i128, d: i128) -> Exact {
    Ratio::new(n, d)
}

/// A random tiny instance: n, s and f_max in 1..=3, payload in 1..=4, PRR a
/// random tenth in [0.3, 1] per node, harvest up to two packets per frame.
///
/// With `ample` the initial energy covers an access period and `s` packets
/// in every frame, so the energy floor never binds. Otherwise it covers at
/// most two access periods and a random number of packets.
pub fn tiny_instance(rng: &mut impl Rng, per_frame_prr: bool, ample: bool) -> ExactInstance<Exact> {
    let n = rng.random_range(1..=3);
    let s = rng.random_range(1..=3usize);
    let f = rng.random_range(1..=3usize);
    let c = EnergyConstants::<Exact>::cc2420();
    let count = |k: u64| Exact::from_count(k);
    let nodes = (0..n)
        .map(|_| {
            let q0 = r(rng.random_range(3..=10), 10);
            let energy = if ample {
                c.e_td
                    + (c.rcap_cost() + c.e_tx * count(s as u64)) * count(f as u64)
                    + c.e_tx * r(rng.random_range(0..=40), 4)
            } else {
                c.e_td
                    + c.rcap_cost() * count(rng.random_range(0..=2))
                    + c.e_tx * count(rng.random_range(0..=(s * f) as u64))
            };
            InstanceNode {
                payload: rng.random_range(1..=4),
                energy,
                prr: (0..f)
                    .map(|_| {
                        if per_frame_prr {
                            r(rng.random_range(3..=10), 10)
                        } else {
                            q0
                        }
                    })
                    .collect(),
                harvest: (0..f)
                    .map(|_| c.e_tx * r(rng.random_range(0..=4), 2))
                    .collect(),
            }
        })
        .collect();
    ExactInstance {
        s,
        f_max: f,
        kappa: r(1, 2),
        constants: c,
        nodes,
    }
}
