use std::collections::BTreeMap;

use hamdiet::engine::{run, Algorithm, AlgorithmConfig};
use hamdiet::instance::{
    assign_costs, build_instance, load_foods, map_categories, read_foods, write_foods,
    CategoryMapping, Cents, DatasetFormat, NutrientRequirements, PenaltySchedule,
};
use hamdiet::report::RunRecord;
use hamdiet::synthetic::{sample_requirements_text, synthetic_dataset_scaled};

#[test]
fn dataset_round_trip_through_csv() {
    let items = assign_costs(
        synthetic_dataset_scaled(3, 10),
        Cents(100),
        Cents(1000),
        9,
        false,
    )
    .unwrap();
    let mut buf = Vec::new();
    write_foods(&mut buf, &items).unwrap();
    let back = read_foods(&buf[..], &DatasetFormat::default()).unwrap();
    assert_eq!(back.len(), items.len());
    for (a, b) in items.iter().zip(&back) {
        assert_eq!(a.name, b.name);
        assert_eq!(a.category, b.category);
        assert_eq!(a.cost, b.cost);
        assert_eq!(a.nutrients, b.nutrients);
        assert_eq!(a.protein, b.protein);
    }
}

#[test]
fn files_to_saved_run() {
    let dir = tempfile::tempdir().unwrap();
    let foods_path = dir.path().join("foods.csv");
    let items = synthetic_dataset_scaled(4, 20);
    write_foods(std::fs::File::create(&foods_path).unwrap(), &items).unwrap();

    let foods = load_foods(&foods_path, &DatasetFormat::default()).unwrap();
    let foods = assign_costs(foods, Cents(100), Cents(1000), 5, false).unwrap();
    let foods = map_categories(foods, &CategoryMapping::default()).unwrap();
    let requirements = NutrientRequirements::parse(&sample_requirements_text()).unwrap();
    let instance = build_instance(foods, requirements, PenaltySchedule::default(), None)
        .unwrap()
        .with_cost_seed(5);

    let config = AlgorithmConfig::new(Algorithm::MoeaHd, 3, 17);
    let result = run(&instance, &config).unwrap();
    let record = RunRecord::new(&result, &instance, BTreeMap::new());
    let out = dir.path().join("nested/run.json");
    record.save(&out).unwrap();
    let loaded = RunRecord::load(&out).unwrap();
    assert_eq!(loaded, record);
    assert_eq!(loaded.instance.cost_seed, Some(5));
    for (sol, rec) in result.nondominated.iter().zip(&loaded.nondominated) {
        assert_eq!(
            rec.genome(instance.num_foods(), instance.horizon())
                .unwrap(),
            sol.genome
        );
    }
}

#[test]
fn missing_dataset_names_the_path() {
    let err = load_foods("/no/such/foods.csv", &DatasetFormat::default()).unwrap_err();
    assert!(err.to_string().contains("/no/such/foods.csv"));
}
