use std::fs::File;
use std::io::{BufReader, BufWriter};

use seqlsh::eval::{ingest, parse_corpus, spread_levels, synth, write_corpus, Format, SynthSpec};
use seqlsh::seqtest::{read_plan_cache, write_plan_cache, PlanCache, PlanShape};
use seqlsh::sketches::{read_sketches, write_sketches, HashFamily, Scheme, SketchSet};
use seqlsh::Measure;

fn corpus_bytes(measure: Measure, seed: u64) -> Vec<u8> {
    let c = synth(&SynthSpec::new(
        measure,
        1000,
        spread_levels(0.1, 0.95, 18, 10),
        seed,
    ))
    .unwrap();
    let mut buf = Vec::new();
    write_corpus(&mut buf, &c).unwrap();
    buf
}

#[test]
fn synth_is_byte_identical_per_seed() {
    for measure in [Measure::Jaccard, Measure::Cosine] {
        assert_eq!(corpus_bytes(measure, 11), corpus_bytes(measure, 11));
        assert_ne!(corpus_bytes(measure, 11), corpus_bytes(measure, 12));
    }
}

#[test]
fn corpus_file_round_trip_is_canonical() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.tsv");
    std::fs::write(&path, "# header\n9\t5 1 3\n\n4\t2\n").unwrap();
    let c = ingest(&path, None).unwrap();
    let mut out = Vec::new();
    write_corpus(&mut out, &c).unwrap();
    assert_eq!(String::from_utf8(out.clone()).unwrap(), "9\t1 3 5\n4\t2\n");
    let again = parse_corpus(std::str::from_utf8(&out).unwrap(), Format::Set).unwrap();
    assert_eq!(again.vectors, c.vectors);
}

#[test]
fn sketch_file_round_trip() {
    let c = synth(&SynthSpec::new(
        Measure::Cosine,
        50,
        spread_levels(0.5, 0.9, 3, 2),
        1,
    ))
    .unwrap();
    let family = HashFamily::new(Scheme::SimHash, 42, 200).unwrap();
    let set = SketchSet {
        family,
        ids: c.vectors.iter().map(|v| v.id()).collect(),
        signatures: family.sign_all(&c.vectors).unwrap(),
    };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.bin");
    write_sketches(BufWriter::new(File::create(&path).unwrap()), &set).unwrap();
    let back = read_sketches(BufReader::new(File::open(&path).unwrap())).unwrap();
    assert_eq!(back.ids, set.ids);
    assert_eq!(back.signatures, set.signatures);
    assert_eq!(back.family, set.family);
}

#[test]
fn plan_cache_file_round_trip() {
    let shape = PlanShape::new(32, 256, 4.0).unwrap();
    let cache = PlanCache::build(0.03, shape, &[0.05, 0.2, 0.5]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plans.bin");
    write_plan_cache(BufWriter::new(File::create(&path).unwrap()), &cache).unwrap();
    let back = read_plan_cache(BufReader::new(File::open(&path).unwrap())).unwrap();
    assert_eq!(back.widths(), cache.widths());
    for (a, b) in cache.plans().iter().zip(back.plans()) {
        assert_eq!(a.points(), b.points());
        assert_eq!(
            (a.lambda, a.coverage, a.attainable),
            (b.lambda, b.coverage, b.attainable)
        );
        for s in [0.1, 0.5, 0.9] {
            assert!(
                (a.stopping_set().total_probability(s) - b.stopping_set().total_probability(s))
                    .abs()
                    < 1e-12
            );
        }
    }
}
