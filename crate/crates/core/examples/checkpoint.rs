//! Saves a scheduling function and value network together, reloads them and
//! checks the reloaded network scores controllers identically.

use sdn_dispatch::dispatch::scheduler_spec;
use sdn_dispatch::ppo::value_spec;
use sdn_dispatch::{Checkpoint, ParamStore};

fn main() -> anyhow::Result<()> {
    let mut ckpt = Checkpoint::default();
    ckpt.insert("scheduler", ParamStore::init(scheduler_spec(), 1));
    ckpt.insert("value", ParamStore::init(value_spec(), 2));

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("model.ckpt");
    ckpt.save(&path)?;
    let text = std::fs::read_to_string(&path)?;
    println!("{} lines; header and first network line:", text.lines().count());
    for line in text.lines().take(2) {
        println!("  {line}");
    }

    let back = Checkpoint::load(&path)?;
    let (a, b) = (ckpt.get("scheduler").unwrap(), back.get("scheduler").unwrap());
    let x = [0.5, 0.2, 0.3, 0.0, 0.9, 0.0, 0.33];
    println!("priority before {:.17}, after reload {:.17}", a.forward(&x)?, b.forward(&x)?);

    let cut = &text[..text.len() / 2];
    match Checkpoint::from_text(cut) {
        Err(e) => println!("a half-written file is rejected: {e}"),
        Ok(_) => anyhow::bail!("truncated checkpoint was accepted"),
    }
    Ok(())
}
