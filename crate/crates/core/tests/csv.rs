//! CSV ingestion and round-trip behavior.

use vertcohirf::datagen::{gen_multimodal, load_csv, read_meta, save_csv, write_meta, DatasetMeta};

#[test]
fn small_numeric_csv_loads_as_a_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tiny.csv");
    std::fs::write(&path, "a,b\n1,2\n3,4\n5,6\n").unwrap();
    let ds = load_csv(&path, None, &[]).unwrap();
    assert_eq!(ds.n(), 3);
    assert_eq!(ds.p(), 2);
    assert_eq!(ds.features[(2, 1)], 6.0);
    assert!(ds.labels.is_none());
    assert_eq!(
        ds.feature_names.as_deref().unwrap(),
        ["a".to_string(), "b".to_string()]
    );
}

#[test]
fn label_column_is_extracted() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("labeled.csv");
    std::fs::write(&path, "x,label\n0.5,1\n0.25,0\n").unwrap();
    let ds = load_csv(&path, Some("label"), &[]).unwrap();
    assert_eq!(ds.p(), 1);
    assert_eq!(ds.labels, Some(vec![1, 0]));
}

#[test]
fn categorical_columns_one_hot_encode_per_level() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cats.csv");
    std::fs::write(&path, "color,x\nred,1\nblue,2\ngreen,3\nred,4\n").unwrap();
    let ds = load_csv(&path, None, &["color".to_string()]).unwrap();
    // Three levels, alphabetic order: blue, green, red.
    assert_eq!(ds.p(), 4);
    assert_eq!(
        ds.feature_names.as_deref().unwrap(),
        [
            "color=blue".to_string(),
            "color=green".to_string(),
            "color=red".to_string(),
            "x".to_string()
        ]
    );
    assert_eq!(ds.features[(0, 2)], 1.0);
    assert_eq!(ds.features[(1, 0)], 1.0);
    assert_eq!(ds.features[(2, 1)], 1.0);
    assert_eq!(ds.features[(0, 0)], 0.0);
}

#[test]
fn non_numeric_and_ragged_input_report_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "a,b\n1,2\n3,oops\n").unwrap();
    let err = load_csv(&path, None, &[]).unwrap_err().to_string();
    assert!(err.contains("line 3"), "{err}");

    let path = dir.path().join("ragged.csv");
    std::fs::write(&path, "a,b\n1,2\n3\n").unwrap();
    let err = load_csv(&path, None, &[]).unwrap_err().to_string();
    assert!(err.contains("3"), "{err}");
}

#[test]
fn generated_data_round_trips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("multimodal.csv");
    let ds = gen_multimodal(60, 4).unwrap();
    save_csv(&ds, &path).unwrap();
    let back = load_csv(&path, Some("label"), &[]).unwrap();
    assert_eq!(back.labels, ds.labels);
    assert_eq!(back.features, ds.features, "shortest float repr round-trips");
}

#[test]
fn metadata_sidecar_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("multimodal.meta.json");
    let meta = DatasetMeta {
        n: 1200,
        p: 5,
        c: Some(6),
        seed: 42,
        generator: "multimodal".to_string(),
    };
    write_meta(&meta, &path).unwrap();
    assert_eq!(read_meta(&path).unwrap(), meta);
}
