//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints its own PASS/FAIL line; the process exits non-zero if any fails.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::Path;
use std::time::{Duration, Instant};

use scholmig::country_infer::{
    accuracy, fill_missing_countries, held_out_records, tokenize_affiliation, train_country_model,
    Network, TrainConfig,
};
use scholmig::disambig::{disambiguate, DisambigConfig};
use scholmig::ingest::{AuthorshipRecord, Corpus, YearWindow};
use scholmig::metrics::{citation_groups, nmr_series, reported_window, CitationGroup, NmrConfig};
use scholmig::mobility::{
    analyze_corpus, detect_migration_events, MigrationEvent, MobilityClassification, MobilityType,
    YearCountryProfile,
};
use scholmig::report::{mobility_table, run_pipeline, PipelineConfig, MANIFEST, REPORT_FILES};
use scholmig::rng::SeededRng;
use scholmig::synthgen::{generate_corpus, GroundTruth, SynthSpec};
use scholmig::taxonomy_gender::{assign_corpus, Label, DISCIPLINES};
use scholmig::CountryCode;

type Outcome = Result<String, String>;

fn cc(s: &str) -> CountryCode {
    CountryCode::new(s).unwrap()
}

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e<T: std::fmt::Display>(x: T) -> String {
    x.to_string()
}

/// Peak resident set size of this process in bytes.
fn peak_rss() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

fn event_key(e: &MigrationEvent) -> (String, i32, CountryCode, CountryCode) {
    (e.researcher_id.clone(), e.year, e.origin, e.destination)
}

fn truth_events(truth: &GroundTruth) -> BTreeSet<(String, i32, CountryCode, CountryCode)> {
    truth
        .persons
        .iter()
        .flat_map(|p| {
            p.events
                .iter()
                .map(move |e| (p.author_id.clone(), e.year, e.origin, e.destination))
        })
        .collect()
}

fn event_exactness() -> Outcome {
    let spec = SynthSpec {
        seed: 42,
        n_researchers: 1000,
        p_tie_year: 0.0,
        n_id_collisions: 0,
        p_mask_country: 0.0,
        ..SynthSpec::default()
    };
    let start = Instant::now();
    let (corpus, truth) = generate_corpus(&spec).map_err(e)?;
    let out = analyze_corpus(&corpus, spec.focal);
    let elapsed = start.elapsed();
    let detected: BTreeSet<_> = out.events.iter().map(event_key).collect();
    let expected = truth_events(&truth);
    let hits = detected.intersection(&expected).count();
    let recall = hits as f64 / expected.len().max(1) as f64;
    let precision = hits as f64 / detected.len().max(1) as f64;
    check(!expected.is_empty(), "ground truth has no events")?;
    check(
        detected.len() == out.events.len(),
        "duplicate detected events",
    )?;
    check(
        recall == 1.0 && precision == 1.0,
        format!("recall {recall}, precision {precision}"),
    )?;
    check(
        elapsed < Duration::from_secs(10),
        format!("took {elapsed:?}"),
    )?;
    Ok(format!(
        "{} events, recall {recall}, precision {precision}, {:.2}s",
        expected.len(),
        elapsed.as_secs_f64()
    ))
}

fn profile(modes: &[(i32, &[&str])]) -> YearCountryProfile {
    let m: BTreeMap<i32, BTreeSet<CountryCode>> = modes
        .iter()
        .map(|(y, cs)| (*y, cs.iter().map(|c| cc(c)).collect()))
        .collect();
    YearCountryProfile::from_modes("r", m).unwrap()
}

fn tie_semantics() -> Outcome {
    let cases: [(&[(i32, &[&str])], Vec<(i32, &str, &str)>); 3] = [
        (
            &[(2001, &["DE"]), (2002, &["DE"]), (2003, &["US"])],
            vec![(2003, "DE", "US")],
        ),
        (
            &[(2001, &["DE"]), (2002, &["DE", "US"]), (2003, &["US"])],
            vec![(2003, "DE", "US")],
        ),
        (&[(2001, &["DE"]), (2005, &["DE"])], vec![]),
    ];
    for (i, (modes, expected)) in cases.iter().enumerate() {
        let got: Vec<(i32, CountryCode, CountryCode)> = detect_migration_events(&profile(modes))
            .iter()
            .map(|e| (e.year, e.origin, e.destination))
            .collect();
        let want: Vec<(i32, CountryCode, CountryCode)> = expected
            .iter()
            .map(|(y, o, d)| (*y, cc(o), cc(d)))
            .collect();
        check(
            got == want,
            format!("sequence {}: got {got:?}, want {want:?}", i + 1),
        )?;
    }
    Ok("3 hand-traced sequences".into())
}

/// Mode sets per year, counted from scratch.
fn oracle_modes(records: &[&AuthorshipRecord]) -> BTreeMap<i32, BTreeSet<CountryCode>> {
    let mut tally: BTreeMap<i32, BTreeMap<CountryCode, usize>> = BTreeMap::new();
    for r in records {
        if let Some(c) = r.country {
            *tally.entry(r.year).or_default().entry(c).or_default() += 1;
        }
    }
    tally
        .into_iter()
        .map(|(y, counts)| {
            let max = *counts.values().max().unwrap();
            (
                y,
                counts
                    .into_iter()
                    .filter(|(_, n)| *n == max)
                    .map(|(c, _)| c)
                    .collect(),
            )
        })
        .collect()
}

fn oracle_event_count(modes: &BTreeMap<i32, BTreeSet<CountryCode>>) -> usize {
    let mut it = modes.values();
    let Some(first) = it.next() else { return 0 };
    let mut anchor = first.clone();
    let mut n = 0;
    for m in it {
        let common: BTreeSet<_> = anchor.intersection(m).copied().collect();
        if common.is_empty() {
            n += 1;
            anchor = m.clone();
        } else {
            anchor = common;
        }
    }
    n
}

fn recheck_class(
    c: &MobilityClassification,
    records: &[&AuthorshipRecord],
    focal: CountryCode,
) -> Result<(), String> {
    let modes = oracle_modes(records);
    let pubs: HashSet<&str> = records.iter().map(|r| r.publication_id.as_str()).collect();
    let o = *modes.values().next().unwrap().iter().next().unwrap();
    let d = *modes.values().next_back().unwrap().iter().next().unwrap();
    let ever_focal = modes.values().any(|s| s.contains(&focal));
    let only_focal = modes.values().all(|s| s.iter().all(|x| *x == focal));
    let n_events = oracle_event_count(&modes);
    let id = &c.researcher_id;
    check(
        ever_focal,
        format!("{id} admitted without {focal} as a mode"),
    )?;
    check(
        c.academic_origin == Some(o) && c.academic_destination == Some(d),
        format!("{id} endpoints"),
    )?;
    let ok = match c.mobility_type {
        MobilityType::SinglePaperAuthor => pubs.len() == 1,
        MobilityType::NonMover => {
            pubs.len() > 1 && (only_focal || (o == focal && d == focal && n_events == 0))
        }
        MobilityType::Immigrant => pubs.len() > 1 && !only_focal && o != focal && d == focal,
        MobilityType::Emigrant => pubs.len() > 1 && !only_focal && o == focal && d != focal,
        MobilityType::ReturnMigrant => {
            pubs.len() > 1 && !only_focal && o == focal && d == focal && n_events >= 1
        }
        MobilityType::Transient => pubs.len() > 1 && !only_focal && o != focal && d != focal,
    };
    check(
        ok,
        format!("{id} fails the {:?} definition", c.mobility_type),
    )
}

fn mobility_partition() -> Outcome {
    let mut corpora = 0;
    let mut rows = 0;
    for (seed, p_tie, focal) in [
        (1, 0.0, "DE"),
        (2, 0.2, "DE"),
        (3, 0.5, "US"),
        (4, 0.05, "FR"),
        (42, 0.05, "DE"),
    ] {
        let spec = SynthSpec {
            seed,
            n_researchers: 600,
            p_tie_year: p_tie,
            focal: cc(focal),
            ..SynthSpec::default()
        };
        let (corpus, _) = generate_corpus(&spec).map_err(e)?;
        let out = analyze_corpus(&corpus, spec.focal);
        let table = mobility_table(&out.classes);
        let total: f64 = table.iter().map(|r| r.percent).sum();
        let count: usize = table.iter().map(|r| r.count).sum();
        check(
            (total - 100.0).abs() <= 0.05,
            format!("seed {seed}: percentages sum to {total}"),
        )?;
        check(
            count == out.classes.len(),
            format!("seed {seed}: counts do not partition"),
        )?;

        let mut by_author: HashMap<&str, Vec<&AuthorshipRecord>> = HashMap::new();
        for r in &corpus.records {
            by_author.entry(r.author_id.as_str()).or_default().push(r);
        }
        let admitted: HashSet<&str> = out
            .classes
            .iter()
            .map(|c| c.researcher_id.as_str())
            .collect();
        for (id, recs) in &by_author {
            let modes = oracle_modes(recs);
            let linked = modes.values().any(|s| s.contains(&spec.focal));
            check(
                linked == admitted.contains(id),
                format!("{id}: admission mismatch"),
            )?;
        }
        for c in &out.classes {
            recheck_class(c, &by_author[c.researcher_id.as_str()], spec.focal)?;
        }
        corpora += 1;
        rows += out.classes.len();
    }
    Ok(format!(
        "{corpora} corpora, {rows} classifications re-checked"
    ))
}

fn disambiguation() -> Outcome {
    let spec = SynthSpec {
        seed: 42,
        n_researchers: 1000,
        n_id_collisions: 50,
        p_mask_country: 0.0,
        ..SynthSpec::default()
    };
    let (corpus, truth) = generate_corpus(&spec).map_err(e)?;
    let (split, report) = disambiguate(&corpus, &DisambigConfig::default()).map_err(e)?;

    let parent = |id: &str| id.split('#').next().unwrap().to_owned();
    let mut clusters: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
    for r in &split.records {
        let person = truth.record_person[&r.record_id];
        clusters
            .entry(r.author_id.clone())
            .or_default()
            .insert(person);
    }
    let mut by_parent: BTreeMap<String, Vec<&BTreeSet<usize>>> = BTreeMap::new();
    for (id, persons) in &clusters {
        by_parent.entry(parent(id)).or_default().push(persons);
    }

    let collided: BTreeSet<&str> = truth
        .collisions
        .iter()
        .map(|c| c.author_id.as_str())
        .collect();
    check(
        collided.len() == 50,
        format!("{} planted collisions", collided.len()),
    )?;
    let mut separated = 0;
    for c in &truth.collisions {
        let parts = &by_parent[&c.author_id];
        let pure = parts.iter().all(|s| s.len() == 1);
        let covered: BTreeSet<usize> = parts.iter().flat_map(|s| s.iter().copied()).collect();
        if pure && covered.len() == 2 {
            separated += 1;
        }
    }
    let purity = separated as f64 / collided.len() as f64;
    check(purity >= 0.9, format!("collision purity {purity}"))?;

    let suspicious: Vec<&str> = report.splits.iter().map(|s| s.author_id.as_str()).collect();
    let mut others = 0;
    for id in suspicious.iter().filter(|id| !collided.contains(*id)) {
        let parts = by_parent.get(*id).ok_or(format!("{id} vanished"))?;
        check(!parts.is_empty(), format!("{id} has no cluster"))?;
        check(
            parts.iter().all(|s| s.len() == 1),
            format!("{id}: a cluster merges persons"),
        )?;
        others += 1;
    }
    check(others > 0, "no non-collided suspicious IDs")?;
    let cross = clusters.values().filter(|s| s.len() > 1).count();
    Ok(format!(
        "collision purity {purity:.3} ({separated}/50), {others} other suspicious IDs clean, {cross} mixed clusters overall"
    ))
}

fn slot(n: &mut Network, which: u8, idx: usize) -> &mut f64 {
    match which {
        0 => &mut n.w1[idx],
        1 => &mut n.b1[idx],
        2 => &mut n.w2[idx],
        _ => &mut n.b2[idx],
    }
}

fn gradient_check() -> Result<f64, String> {
    let (corpus, _) = generate_corpus(&SynthSpec {
        n_researchers: 20,
        n_id_collisions: 0,
        n_prolific: 0,
        ..SynthSpec::default()
    })
    .map_err(e)?;
    let dim = 1 << 16;
    let feats: Vec<_> = corpus.records[..10]
        .iter()
        .map(|r| tokenize_affiliation(&r.affiliation_text, dim).features)
        .collect();
    let n_classes = 5;
    let batch: Vec<_> = feats
        .iter()
        .enumerate()
        .map(|(i, f)| (f, i % n_classes))
        .collect();
    let mut rng = SeededRng::new(7);
    let mut net = Network::init(dim, 64, n_classes, &mut rng);
    for b in net.b1.iter_mut().chain(net.b2.iter_mut()) {
        *b = (rng.uniform() - 0.5) * 0.1;
    }
    let (_, g) = net.loss_and_gradients(&batch);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut probe = |net: &mut Network, which: u8, idx: usize, analytic: f64| {
        let orig = *slot(net, which, idx);
        *slot(net, which, idx) = orig + h;
        let up = net.loss(&batch);
        *slot(net, which, idx) = orig - h;
        let down = net.loss(&batch);
        *slot(net, which, idx) = orig;
        let numeric = (up - down) / (2.0 * h);
        let denom = (analytic.abs() + numeric.abs()).max(1e-8);
        worst = worst.max((analytic - numeric).abs() / denom);
    };
    for (&feature, row) in g.w1.iter().take(8) {
        for k in (0..net.hidden).step_by(4) {
            let idx = feature as usize * net.hidden + k;
            probe(&mut net, 0, idx, row[k]);
        }
    }
    for k in 0..net.hidden {
        probe(&mut net, 1, k, g.b1[k]);
    }
    for k in (0..net.w2.len()).step_by(3) {
        probe(&mut net, 2, k, g.w2[k]);
    }
    for k in 0..n_classes {
        probe(&mut net, 3, k, g.b2[k]);
    }
    Ok(worst)
}

fn country_classifier() -> Outcome {
    let spec = SynthSpec {
        seed: 42,
        p_mask_country: 0.0,
        ..SynthSpec::default()
    };
    let (corpus, _) = generate_corpus(&spec).map_err(e)?;
    let check_ends = corpus.records.iter().all(|r| {
        r.country
            .and_then(|c| c.name())
            .is_some_and(|n| r.affiliation_text.ends_with(n))
    });
    check(check_ends, "an affiliation lacks its country token")?;
    let model = train_country_model(&corpus, &TrainConfig::default()).map_err(e)?;
    let acc = model.training_meta.held_out_accuracy;
    let held = held_out_records(&model, &corpus).map_err(e)?;
    let recomputed = accuracy(&model, &held);
    check(acc >= 0.95, format!("held-out accuracy {acc}"))?;
    check(
        recomputed == acc,
        format!("stored {acc} vs recomputed {recomputed}"),
    )?;
    let worst = gradient_check()?;
    check(worst <= 1e-4, format!("gradient relative error {worst:e}"))?;
    Ok(format!(
        "held-out accuracy {acc:.4} on {} records, gradient relative error {worst:.2e}",
        held.len()
    ))
}

fn masked_recovery() -> Outcome {
    let spec = SynthSpec {
        seed: 42,
        n_masked: Some(100),
        ..SynthSpec::default()
    };
    let (corpus, truth) = generate_corpus(&spec).map_err(e)?;
    check(
        truth.masked.len() == 100,
        format!("{} masked", truth.masked.len()),
    )?;
    let model = train_country_model(&corpus, &TrainConfig::default()).map_err(e)?;
    let (filled, report) = fill_missing_countries(&corpus, &model);
    let by_id: HashMap<&str, &AuthorshipRecord> = filled
        .records
        .iter()
        .map(|r| (r.record_id.as_str(), r))
        .collect();
    let restored = truth
        .masked
        .iter()
        .filter(|(id, c)| by_id[id.as_str()].country == Some(**c))
        .count();
    let untouched = corpus
        .records
        .iter()
        .zip(&filled.records)
        .all(|(a, b)| a.country.is_none() || a.country == b.country);
    check(untouched, "a present country changed")?;
    check(restored >= 95, format!("{restored}/100 restored"))?;
    Ok(format!("{restored}/100 restored, {} filled", report.filled))
}

fn nmr() -> Outcome {
    let spec = SynthSpec {
        seed: 42,
        ..SynthSpec::default()
    };
    let (corpus, _) = generate_corpus(&spec).map_err(e)?;
    let focal = spec.focal;
    let events = analyze_corpus(&corpus, focal).events;
    let cfg = NmrConfig::default();
    let series = nmr_series(&events, &corpus, focal, &cfg).map_err(e)?;

    let w = reported_window(YearWindow::new(1996, 2020), &cfg).map_err(e)?;
    check(
        (w.start_year, w.end_year) == (1998, 2017),
        format!("reported window {}..{}", w.start_year, w.end_year),
    )?;
    let years: Vec<i32> = series.rows.iter().map(|r| r.year).collect();
    check(
        years == (1998..=2017).collect::<Vec<_>>(),
        format!("series years {years:?}"),
    )?;

    let mut compared = 0;
    for row in &series.rows {
        let y = row.year;
        let inflow = events
            .iter()
            .filter(|e| e.year == y && e.destination == focal)
            .count();
        let outflow = events
            .iter()
            .filter(|e| e.year == y && e.origin == focal)
            .count();
        let pop: HashSet<&str> = corpus
            .records
            .iter()
            .filter(|r| r.country == Some(focal) && r.year >= y - 2 && r.year <= y + 2)
            .map(|r| r.author_id.as_str())
            .collect();
        let expected =
            (!pop.is_empty()).then(|| (inflow as f64 - outflow as f64) / pop.len() as f64 * 1000.0);
        check(row.population == pop.len(), format!("{y}: population"))?;
        match (row.nmr, expected) {
            (Some(a), Some(b)) => check((a - b).abs() <= 1e-9, format!("{y}: {a} vs {b}"))?,
            (None, None) => {}
            (a, b) => return Err(format!("{y}: {a:?} vs {b:?}")),
        }
        compared += 1;
    }
    Ok(format!(
        "{compared} years match brute force, window 1998-2017"
    ))
}

fn tertiles() -> Outcome {
    let mut rng = SeededRng::new(3);
    let mut values: BTreeSet<u64> = BTreeSet::new();
    while values.len() < 300 {
        values.insert(rng.next_u64() >> 11);
    }
    let mut input: Vec<(String, f64)> = values
        .iter()
        .enumerate()
        .map(|(i, v)| (format!("r{i}"), *v as f64 / (1u64 << 53) as f64 * 5.0))
        .collect();
    rng.shuffle(&mut input);
    let (groups, t) = citation_groups(&input).ok_or("no groups")?;
    let mut sizes = [0usize; 3];
    for g in groups.values() {
        sizes[*g as usize] += 1;
    }
    check(sizes == [100, 100, 100], format!("group sizes {sizes:?}"))?;

    // With 301 values both thresholds land on data points, which must be Medium.
    let closed: Vec<(String, f64)> = (0..301)
        .map(|i| (format!("c{i}"), i as f64 * 0.01))
        .collect();
    let (g2, t2) = citation_groups(&closed).ok_or("no groups")?;
    check(
        t2.t1 == closed[100].1 && t2.t2 == closed[200].1,
        format!("thresholds {t2:?}"),
    )?;
    check(
        g2["c100"] == CitationGroup::Medium && g2["c200"] == CitationGroup::Medium,
        "threshold values are not Medium",
    )?;
    check(
        g2["c99"] == CitationGroup::Low && g2["c201"] == CitationGroup::High,
        "neighbours of the thresholds misplaced",
    )?;
    Ok(format!(
        "100/100/100 with t1={:.4}, t2={:.4}; Medium is closed",
        t.t1, t.t2
    ))
}

fn record(author: &str, n: usize, codes: Vec<u16>) -> AuthorshipRecord {
    AuthorshipRecord {
        record_id: format!("{author}-{n}"),
        author_id: author.to_owned(),
        publication_id: format!("{author}-p{n}"),
        year: 2000,
        affiliation_text: String::new(),
        country: None,
        asjc_codes: codes,
        citation_count: 0,
        given_name: String::new(),
        surname: String::new(),
        coauthor_ids: vec![],
        funding_texts: vec![],
        grant_numbers: vec![],
        country_imputed: false,
    }
}

fn z_test() -> Outcome {
    let mut rng = SeededRng::new(11);
    let mut records = Vec::new();
    let mut raw: BTreeMap<String, Vec<u16>> = BTreeMap::new();
    for i in 0..500 {
        let id = format!("Z{i:03}");
        let n_pubs = 1 + rng.below(8);
        // Half the population concentrates on a home discipline.
        let home = DISCIPLINES[rng.below(26)].prefix;
        let focused = i % 2 == 0;
        for p in 0..n_pubs {
            let k = 1 + rng.below(3);
            let codes: Vec<u16> = (0..k)
                .map(|_| {
                    let prefix = if focused && rng.bernoulli(0.8) {
                        home
                    } else {
                        DISCIPLINES[rng.below(26)].prefix
                    };
                    prefix * 100 + rng.below(100) as u16
                })
                .collect();
            raw.entry(id.clone()).or_default().extend(&codes);
            records.push(record(&id, p, codes));
        }
    }
    let corpus = Corpus {
        records,
        window: YearWindow::new(1996, 2020),
        snapshot_date: chrono::NaiveDate::from_ymd_opt(2020, 4, 1).unwrap(),
    };
    let (assignments, _) = assign_corpus(&corpus, 1.0);

    let ids: Vec<&String> = raw.keys().collect();
    let freq: Vec<Vec<f64>> = ids
        .iter()
        .map(|id| {
            let codes = &raw[*id];
            let mut counts = vec![0.0; 26];
            for c in codes {
                counts[(c / 100 - 11) as usize] += 1.0;
            }
            counts.iter().map(|n| n / codes.len() as f64).collect()
        })
        .collect();
    let n = ids.len() as f64;
    let mut multi = 0;
    for (row, id) in ids.iter().enumerate() {
        let mut best: Option<(usize, f64)> = None;
        for d in 0..26 {
            let mean = freq.iter().map(|f| f[d]).sum::<f64>() / n;
            let var = freq.iter().map(|f| (f[d] - mean).powi(2)).sum::<f64>() / n;
            if var == 0.0 {
                continue;
            }
            let z = (freq[row][d] - mean) / var.sqrt();
            if best.is_none_or(|(_, b)| z > b) {
                best = Some((d, z));
            }
        }
        let expected = match best {
            Some((d, z)) if z > 1.0 => Label::Assigned(d),
            _ => {
                multi += 1;
                Label::Multidisciplinary
            }
        };
        let a = assignments
            .iter()
            .find(|a| &a.researcher_id == *id)
            .ok_or(format!("{id} unassigned"))?;
        check(
            a.discipline == expected,
            format!("{id}: {} vs {}", a.discipline, expected),
        )?;
    }
    check(multi > 0, "no Multidisciplinary researcher in the sample")?;
    Ok(format!("500 researchers match, {multi} Multidisciplinary"))
}

fn pipeline_config(n: usize) -> PipelineConfig {
    PipelineConfig {
        synth: Some(SynthSpec {
            n_researchers: n,
            ..SynthSpec::default()
        }),
        ..PipelineConfig::default()
    }
}

fn determinism() -> Outcome {
    let a = tempfile::tempdir().map_err(e)?;
    let b = tempfile::tempdir().map_err(e)?;
    let cfg = pipeline_config(1000);
    run_pipeline(&cfg, a.path()).map_err(e)?;
    run_pipeline(&cfg, b.path()).map_err(e)?;
    let mut n = 0;
    for name in REPORT_FILES.iter().chain([&MANIFEST]) {
        let read = |d: &Path| std::fs::read(d.join(name)).map_err(e);
        check(
            read(a.path())? == read(b.path())?,
            format!("{name} differs"),
        )?;
        n += 1;
    }
    Ok(format!("{n} files byte-identical"))
}

fn scale() -> Outcome {
    let mut n = 3000;
    loop {
        let spec = SynthSpec {
            n_researchers: n,
            ..SynthSpec::default()
        };
        let (corpus, _) = generate_corpus(&spec).map_err(e)?;
        if corpus.len() >= 100_000 {
            break;
        }
        n += 200;
    }
    let dir = tempfile::tempdir().map_err(e)?;
    let start = Instant::now();
    let run = run_pipeline(&pipeline_config(n), dir.path()).map_err(e)?;
    let elapsed = start.elapsed();
    let records = run.ingest.accepted;
    let peak = peak_rss().ok_or("peak memory unavailable")?;
    check(records >= 100_000, format!("{records} records"))?;
    check(
        elapsed < Duration::from_secs(60),
        format!("took {elapsed:?}"),
    )?;
    check(peak < 2 << 30, format!("peak RSS {} MiB", peak >> 20))?;
    Ok(format!(
        "{records} records in {:.1}s, peak RSS {} MiB",
        elapsed.as_secs_f64(),
        peak >> 20
    ))
}

fn main() {
    // The scale test goes first so that peak RSS reflects it alone.
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("scale smoke test", scale),
        ("event-detection exactness", event_exactness),
        ("tie semantics", tie_semantics),
        ("mobility partition", mobility_partition),
        ("disambiguation", disambiguation),
        ("country classifier", country_classifier),
        ("masked-country recovery", masked_recovery),
        ("net migration rate", nmr),
        ("tertile grouping", tertiles),
        ("z-test assignment", z_test),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} [{secs:.1}s]"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why} [{secs:.1}s]");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
