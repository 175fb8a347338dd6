use std::io::Write;
use std::path::PathBuf;

use ocl_core::{
    export_orders, fit_kmodes, fit_ocl, load_csv, read_csv, to_toml, AttributeKind, Dataset, Error,
    FitConfig, MissingPolicy, OrdinalPolicy, Schema,
};

fn fixture(stem: &str) -> Dataset {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    let schema = Schema::load(dir.join(format!("{stem}.toml"))).unwrap();
    load_csv(
        dir.join(format!("{stem}.csv")),
        &schema,
        MissingPolicy::DropRow,
    )
    .unwrap()
}

#[test]
fn bundled_fixtures_load_with_expected_shapes() {
    // (stem, rows, categorical, numerical, classes)
    for (stem, n, s, num, k) in [
        ("zoo", 101, 16, 0, 7),
        ("chess", 3196, 36, 0, 2),
        ("ac_subset", 85, 8, 6, 2),
    ] {
        let d = fixture(stem);
        assert_eq!(d.n_samples(), n, "{stem}");
        assert_eq!(d.n_categorical(), s, "{stem}");
        assert_eq!(d.n_numerical(), num, "{stem}");
        assert_eq!(d.labels().unwrap().num_classes(), k, "{stem}");
    }
}

#[test]
fn zoo_fit_traces_are_monotone_and_orders_export() {
    let d = fixture("zoo");
    for seed in 0..5 {
        let fit = fit_ocl(&d, &FitConfig::new(7).with_seed(seed)).unwrap();
        assert!(fit.trace.is_monotone());
        assert!(fit.trace.converged);
        assert!(fit.trace.best_objective <= fit.trace.initial_objective);
        let (km, _) = fit_kmodes(&d, 7, seed).unwrap();
        assert_eq!(km.len(), 101);
    }
    let fit = fit_ocl(&d, &FitConfig::new(7)).unwrap();
    let export = export_orders(&d, &fit);
    let legs = export
        .attribute
        .iter()
        .find(|a| a.attribute == "legs")
        .unwrap();
    assert!(legs.learned);
    assert_eq!(legs.values_by_rank.len(), 6);
    assert_eq!(legs.scores.as_ref().unwrap().len(), 6);
    assert!(to_toml(&export).unwrap().contains("attribute = \"legs\""));
}

const SIZES: &str = "\
[[column]]
name = \"size\"
kind = \"ordinal\"
order = [\"small\", \"medium\", \"large\"]

[[column]]
name = \"colour\"
kind = \"nominal\"

[[column]]
name = \"weight\"
kind = \"numerical\"

[[column]]
name = \"class\"
kind = \"label\"
";

#[test]
fn ordinal_columns_keep_their_declared_order() {
    let schema = Schema::from_toml(SIZES).unwrap();
    let csv = "size,colour,weight,class\n\
               large,red,3.5,a\n\
               small,blue,1.0,b\n\
               medium,?,2.0,a\n\
               medium,red,2.5,a\n\
               small,blue,0.5,b\n";
    let d = read_csv(csv.as_bytes(), &schema, MissingPolicy::DropRow).unwrap();
    assert_eq!(d.n_samples(), 4);
    assert_eq!(d.attributes()[0].kind, AttributeKind::Ordinal);
    assert!(d.has_ordinal());

    let strict = read_csv(csv.as_bytes(), &schema, MissingPolicy::Error);
    assert!(matches!(strict, Err(Error::MissingCell { .. })));

    // With ordinal orders preserved the size attribute keeps small < medium < large.
    let cfg = FitConfig::new(2).with_ordinal_policy(OrdinalPolicy::PreserveOrdinal);
    let fit = fit_ocl(&d, &cfg).unwrap();
    let export = export_orders(&d, &fit);
    assert_eq!(
        export.attribute[0].values_by_rank,
        ["small", "medium", "large"]
    );
    assert!(!export.attribute[0].learned);
}

#[test]
fn unknown_ordinal_value_is_rejected() {
    let schema = Schema::from_toml(SIZES).unwrap();
    let csv = "size,colour,weight,class\nhuge,red,1.0,a\n";
    let err = read_csv(csv.as_bytes(), &schema, MissingPolicy::DropRow).unwrap_err();
    assert!(matches!(err, Error::UnknownOrdinalValue { .. }), "{err}");
}

#[test]
fn schema_round_trips_through_a_file() {
    let schema = Schema::from_toml(SIZES).unwrap();
    let mut file = tempfile::NamedTempFile::new().unwrap();
    file.write_all(schema.to_toml().as_bytes()).unwrap();
    assert_eq!(Schema::load(file.path()).unwrap(), schema);
}
