//! Builds each default atlas, plans one query, and prints which chart
//! answered it.

use kinecx::roadmaps::default_atlas;
use kinecx::verification::uniform_family;
use kinecx::{forward, Mechanism};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> kinecx::Result<()> {
    let mechanisms = [
        Mechanism::single_revolute(2)?,
        Mechanism::planar_arm(vec![2.0, 1.0])?,
        Mechanism::universal(1.0)?,
        Mechanism::TripleRollWrist,
        Mechanism::torus_identity(3)?,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for mech in &mechanisms {
        let atlas = default_atlas(mech)?;
        let family = uniform_family(mech);
        let query = family.build(&family.random_params(&mut rng)).expect("uniform family is total");
        let (chart, path) = atlas.plan(&query)?;
        let reached = forward(mech, path.end())?;
        println!(
            "{:<45} {} charts; chart {chart} ({}) reaches {:?}",
            atlas.name,
            atlas.len(),
            atlas.charts[chart].label,
            reached.kind()
        );
    }
    Ok(())
}
