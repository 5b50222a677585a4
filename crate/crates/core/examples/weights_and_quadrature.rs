//! Weight families, exact antiderivatives and the piecewise quadrature path.

use aptree::radial_weight::{
    ess_extremum, integrate, Extremum, IntegrandSpec, Interpolation, TailRule, Tolerance, WeightFunction,
};

fn main() -> aptree::Result<()> {
    let tol = Tolerance::default();
    let reciprocal = WeightFunction::truncated_reciprocal();
    let step = WeightFunction::step(vec![1.0, 3.0, 2.0], TailRule::Geometric { ratio: 0.5 })?;
    let bump = WeightFunction::tabulated(
        vec![(0.0, 1.0), (1.0, 2.0), (2.0, 0.5)],
        Interpolation::PiecewiseLinear,
        TailRule::Constant,
    )?;

    for (name, w) in [("min{1,1/t}", &reciprocal), ("step", &step), ("bump", &bump)] {
        println!(
            "{name:>10}: w(0.5) = {:.4}  w(2.5) = {:.4}  ∫_0^6 w = {:.6}  breakpoints in (0,6): {:?}",
            w.evaluate(0.5)?,
            w.evaluate(2.5)?,
            w.integral(0.0, 6.0),
            w.breakpoints(0.0, 6.0)
        );
    }

    // a product that needs quadrature: μ/λ with λ = (1+t)^{1/2}
    let lambda = WeightFunction::power(0.5)?;
    let ratio = IntegrandSpec::weight(&reciprocal).over(&lambda);
    println!("∫_0^10 μ/λ = {:.12}", integrate(&ratio, 0.0, 10.0, &tol)?);

    // t^{-1/2} is integrable at the root, t^{-1} is not
    let sing = WeightFunction::pure_power(-0.5)?;
    println!("∫_0^1 t^(-1/2) = {:.12}", integrate(&IntegrandSpec::weight(&sing), 0.0, 1.0, &tol)?);
    let kernel = IntegrandSpec::weight(&sing).raised_to(2.0)?;
    println!("∫_0^1 t^(-1) -> {:?}", integrate(&kernel, 0.0, 1.0, &tol).err());

    let sup = ess_extremum(&IntegrandSpec::weight(&bump), 0.0, 3.0, Extremum::Sup, &tol)?;
    let inf = ess_extremum(&IntegrandSpec::weight(&bump), 0.0, 3.0, Extremum::Inf, &tol)?;
    println!("bump on (0,3): ess sup {sup}, ess inf {inf}");
    Ok(())
}
