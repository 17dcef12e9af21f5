//! Parses a MovieLens-style `user::item::rating::timestamp` file, binarizes
//! five-star ratings and densifies ids.
//!
//!     cargo run --example ingest_ratings -- [path] [delimiter]

use debias_rec::ingest::{binarize, parse_file, positives, DEFAULT_DELIMITER};

fn main() -> debias_rec::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/toy/ratings.dat").into());
    let delimiter = args.next().unwrap_or_else(|| DEFAULT_DELIMITER.into());

    let records = parse_file(&path, &delimiter)?;
    let b = binarize(&records);
    let pos = positives(&b.interactions);
    println!("{} records, {} users, {} items", records.len(), b.ids.num_users(), b.ids.num_items());
    println!(
        "{} five-star events, {} unique positive pairs",
        b.interactions.iter().filter(|x| x.rating == 1).count(),
        pos.len()
    );
    for x in pos.iter().take(5) {
        println!(
            "  dense ({}, {}) <- raw ({}, {}) at t={}",
            x.user,
            x.item,
            b.ids.raw_user(x.user).unwrap_or("?"),
            b.ids.raw_item(x.item).unwrap_or("?"),
            x.timestamp
        );
    }
    Ok(())
}
