use ucvrp::constants::*;

#[test]
fn fixed_capacity_root_and_ratio() {
    let y0 = solve_y0().unwrap();
    assert!(y0.enclosure.lo > 0.39312, "{y0:?}");
    assert!(ratio_alg1(1.5, &y0.enclosure).hi < 3.0897);
    assert!((gamma_star(y0.value) - 1.5 * y0.value).abs() < 1e-10);
}

#[test]
fn general_capacity_root_and_ratio() {
    let (y1, _) = solve_y1().unwrap();
    assert!(y1.enclosure.lo > 0.17458, "{y1:?}");
    assert!(ratio_alg2(1.5, 1e-10, &y1.enclosure).hi < 3.1759);
}

#[test]
fn refined_tsp_function() {
    let a = f_epsilon(0.000335).unwrap();
    let b = f_epsilon(0.000334).unwrap();
    println!("{a:?}\n{b:?}");
    assert!(a.value < 0.49967);
    assert!(b.value < 0.49915);
    assert!(f_epsilon(0.0001).unwrap().value < f_epsilon(0.001).unwrap().value);
}

#[test]
fn easy_and_hard_ratios() {
    let r = easy_hard_refinement(0.000335, 0.000334).unwrap();
    println!("{}", serde_json::to_string_pretty(&r).unwrap());
    assert!(r.fixed.y0_eps.enclosure.lo > 0.39305);
    assert!(r.fixed.final_ratio <= 3.0894);
    assert!(r.fixed.improvement >= 0.00031);
    assert!(r.general.y1_eps.enclosure.lo > 0.17457);
    assert!(r.general.hard_ratio < 3.1751);
    assert!(r.general.final_ratio <= 3.1755);
    assert!(r.general.improvement >= 0.00039);
}
