// Numeric-aware frame ordering and a directory rename.

use motune::io::{apply_rename_map, order_frames, rename_map};

pub fn run() -> motune::Result<()> {
    let names = ["img_2.png", "img_10.png", "img_1.png"];
    let mut lexicographic = names.to_vec();
    lexicographic.sort();
    println!("lexicographic: {lexicographic:?}");
    println!("numeric:       {:?}", order_frames(&names)?);

    let dir = std::env::temp_dir().join(format!("motune-frames-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| motune::Error::Io { path: dir.clone(), source: e })?;
    for n in names {
        std::fs::write(dir.join(n), n).map_err(|e| motune::Error::Io { path: dir.join(n), source: e })?;
    }
    let map = rename_map(&names)?;
    apply_rename_map(&dir, &map)?;
    for (old, new) in &map {
        let content = std::fs::read_to_string(dir.join(new)).unwrap_or_default();
        println!("{old} -> {new} ({content})");
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(())
}

#[allow(dead_code)]
fn main() -> motune::Result<()> {
    run()
}
