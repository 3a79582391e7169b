//! The on-disk character cache: a second engine reads what the first wrote.

use std::time::Instant;

use minaff::affinization::{CharacterEngine, ModuleLabel};
use minaff::cache::CharCache;
use minaff::CartanData;

fn main() -> minaff::Result<()> {
    let dir = std::env::temp_dir().join("minaff-cache-example");
    let cache = CharCache::new(&dir)?;
    cache.clear()?;
    let label: ModuleLabel = "T:0:2,2,2".parse()?;
    for pass in ["cold", "warm"] {
        let engine =
            CharacterEngine::new(CartanData::type_c(3)?).with_disk_cache(Some(cache.clone()));
        let t = Instant::now();
        let chi = engine.label_character(&label)?;
        println!("{pass}: {} monomials in {:.2?}", chi.len(), t.elapsed());
    }
    let entries = cache.entries()?;
    println!("{} entries under {}", entries.len(), dir.display());
    Ok(())
}
