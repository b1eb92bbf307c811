//! Resolvents, Yosida approximations and membership for the built-in operators.

use mvsde::monotone::{ConvexDomain, Graph1d, MonotoneOperator, OperatorPoint};

fn main() -> mvsde::Result<()> {
    let ops = [
        (
            "box",
            MonotoneOperator::normal_cone(ConvexDomain::cuboid(vec![0.0, 0.0], vec![1.0, 1.0])?),
        ),
        (
            "ball",
            MonotoneOperator::normal_cone(ConvexDomain::ball(vec![0.0, 0.0], 1.0)?),
        ),
        (
            "halfspace",
            MonotoneOperator::normal_cone(ConvexDomain::halfspace(vec![1.0, 1.0], 1.0)?),
        ),
    ];
    let x = [1.5, -0.5];
    for (name, op) in &ops {
        let j = op.resolvent(0.5, &x)?;
        let a = op.yosida(0.5, &x)?;
        let member = OperatorPoint::from_yosida(op, 0.5, &x)?.is_member(op, 1e-9)?;
        println!("{name:<10} J(x) = {j:?}  A_λ(x) = {a:?}  (J, A_λ) in A: {member}");
    }
    let sign = MonotoneOperator::graph(Graph1d::sign());
    for x in [-2.0, -0.3, 0.0, 0.7, 3.0] {
        println!("sign       J_0.5({x:>4}) = {:?}", sign.resolvent(0.5, &[x])?);
    }
    Ok(())
}
