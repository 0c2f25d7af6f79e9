// Reading and writing MOTChallenge files and run configurations.

use motune::io::{format_config, format_detections, format_tracklets, parse_config, parse_mot_str, MotFile, MotKind};

pub fn run() -> motune::Result<()> {
    let det = "1,-1,10,20,5,5,0.9,-1,-1,-1\n2,-1,11,20,5,5,0.8,-1,-1,-1\n";
    if let MotFile::Detections(frames) = parse_mot_str(det, MotKind::Det, "det.txt")? {
        print!("{}", format_detections(&frames));
    }
    let gt = "3,7,0,0,2,2,1,-1,-1,-1\n1,7,0,0,2,2,1,-1,-1,-1\n1,4,9,9,2,2,1,-1,-1,-1\n";
    if let MotFile::Tracklets(tracks) = parse_mot_str(gt, MotKind::Gt, "gt.txt")? {
        print!("{}", format_tracklets(&tracks));
    }
    match parse_mot_str("1,-1,0,0,5,0,0.9\n", MotKind::Det, "bad.txt") {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => println!("unexpectedly accepted"),
    }

    let cfg = parse_config("t_cost = 0.2\nt_assoc = \"greedy\"\n", "run.toml")?;
    print!("{}", format_config(&cfg));
    if let Err(e) = parse_config("d_conf = 1.5\n", "run.toml") {
        println!("rejected: {e}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> motune::Result<()> {
    run()
}
