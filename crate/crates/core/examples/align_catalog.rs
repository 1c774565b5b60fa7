//! Matches scanned volumes to catalog entries by normalized Levenshtein
//! similarity of title and author.

use narrative_net::alignment::{align_all, similarity, VolumeMetadata, DEFAULT_THRESHOLD};

fn volume(id: &str, title: &str, author: &str) -> VolumeMetadata {
    VolumeMetadata {
        volume_id: id.into(),
        title: title.into(),
        author: author.into(),
        language: "en".into(),
        year: None,
        is_fiction: None,
    }
}

fn main() {
    let catalog = [
        volume("cat-1", "Pride and Prejudice", "Austen, Jane"),
        volume("cat-2", "Great Expectations", "Dickens, Charles"),
        volume("cat-3", "Moby-Dick; or, The Whale", "Melville, Herman"),
    ];
    let scans = [
        volume("scan-a", "PRIDE AND PREJUDICE.", "Austen, Jane"),
        volume("scan-b", "Great Expectation", "Dickens, Charles"),
        volume("scan-c", "Moby Dick", "Melville, Herman"),
        volume("scan-d", "Bleak House", "Dickens, Charles"),
    ];

    println!("similarity(\"Great Expectation\", \"Great Expectations\") = {:.3}",
        similarity("Great Expectation", "Great Expectations"));
    for (scan, found) in scans.iter().zip(align_all(&scans, &catalog, DEFAULT_THRESHOLD)) {
        match found {
            Some(m) => println!(
                "{} -> {} (title {:.3}, author {:.3})",
                scan.volume_id, m.catalog_id, m.title_similarity, m.author_similarity
            ),
            None => println!("{} -> no match above {DEFAULT_THRESHOLD}", scan.volume_id),
        }
    }
}
