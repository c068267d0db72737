//! Parse LIBSVM text, build a surrogate benchmark dataset, and split samples
//! i.i.d. across agents.
//!
//! ```text
//! cargo run --example libsvm_partition [path/to/libsvm/file]
//! ```

use dpoem::data::surrogate::SurrogateSpec;
use dpoem::data::{load_libsvm, max_feature_norm, parse_libsvm_str, ParseOptions};
use dpoem::partition_iid;

const TOY: &str = "\
+1 1:0.5 3:1
-1 2:1
# comments and blank lines are skipped

2 1:1 2:1 3:1
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let toy = parse_libsvm_str(TOY, ParseOptions::default())?;
    println!("toy: {} samples, d = {}, labels {:?}", toy.len(), toy.dim(), toy.samples().iter().map(|s| s.label()).collect::<Vec<_>>());

    let data = match std::env::args().nth(1) {
        Some(path) => load_libsvm(path, ParseOptions::default())?,
        None => SurrogateSpec::mushrooms().generate()?,
    };
    let positives = data.samples().iter().filter(|s| s.label() > 0.0).count();
    println!(
        "dataset: {} samples, d = {}, {positives} positive, max feature norm {:.3}",
        data.len(),
        data.dim(),
        max_feature_norm(&data)?
    );
    println!("fingerprint {}", data.fingerprint());

    let part = partition_iid(data.len(), 20, 7)?;
    let sizes: Vec<usize> = part.blocks().iter().map(Vec::len).collect();
    println!("shard sizes over 20 agents: {sizes:?}");
    Ok(())
}
