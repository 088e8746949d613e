//! Small geometric models: a four-generator algebra `A_L` with a target
//! complex `T` built from a shifted copy of `A_L` and a class `1_X`.

use super::{OCInstance, OpenClosedError, SphereTerms};
use crate::ainfty::{from_dga, AInfty, CheckLine, InteriorAlgebra, QFamily};
use crate::family::{LinearMap, SparseFamily};
use crate::graded::{Element, Gen, GradedModule, Parity};
use crate::scalars::{Cap, PiGroup, FormalVarSpec, Q, Ring};
use std::collections::HashMap;
use std::sync::Arc;

pub const ONE: Gen = 0;
pub const X: Gen = 1;
pub const Y: Gen = 2;
pub const XY: Gen = 3;

/// Forms on `L` (basis `1, x, y, xy`) and a model of currents on `X`:
/// `u_g` of degree `|g| + n` with `d u_g = u_{dg}`, and `1_X`.
#[derive(Clone, Debug)]
pub struct ToyGeometry {
    pub n: i64,
    pub ring: Arc<Ring>,
    pub l: Arc<GradedModule>,
    pub d_l: LinearMap,
    pub product: HashMap<(Gen, Gen), Element>,
    pub x: Arc<GradedModule>,
    pub d_x: LinearMap,
    pub one_x: Gen,
    /// `i_*`, of degree `n`.
    pub push: LinearMap,
    /// `i^*`.
    pub pull: LinearMap,
}

impl ToyGeometry {
    /// `n = 2`: `Λ[x, y]` with `dx = xy`. `n = 3`: `|x| = 1`, `|y| = 2`,
    /// `dx = y`, `y^2 = 0`. Extra generators of `T` come after `u_g` and `1_X`
    /// with zero differential.
    pub fn standard(n: i64, ring: Arc<Ring>, extra: &[(&str, i64)]) -> Result<ToyGeometry, OpenClosedError> {
        let one = ring.one();
        let e = |g: Gen| Element::single(g, one.clone());
        let mut product = HashMap::new();
        for g in [ONE, X, Y, XY] {
            product.insert((ONE, g), e(g));
            product.insert((g, ONE), e(g));
        }
        let mut d_l = LinearMap::new(1);
        let l = match n {
            2 => {
                product.insert((X, Y), e(XY));
                product.insert((Y, X), e(XY).neg());
                d_l.set(X, e(XY));
                GradedModule::from_pairs(&[("1", 0), ("x", 1), ("y", 1), ("xy", 2)])
            }
            3 => {
                product.insert((X, Y), e(XY));
                product.insert((Y, X), e(XY));
                d_l.set(X, e(Y));
                GradedModule::from_pairs(&[("1", 0), ("x", 1), ("y", 2), ("xy", 3)])
            }
            _ => return Err(OpenClosedError::Geometry(format!("no standard toy for n = {n}"))),
        };
        let mut pairs: Vec<(String, i64)> = l
            .gens()
            .map(|g| (format!("u{}", l.name(g)), l.degree(g) + n))
            .collect();
        pairs.push(("1X".into(), 0));
        pairs.extend(extra.iter().map(|(s, d)| (s.to_string(), *d)));
        let x = GradedModule::new(pairs.iter().map(|p| p.0.clone()).collect(), pairs.iter().map(|p| p.1).collect())
            .map_err(|err| OpenClosedError::Geometry(err.to_string()))?;
        let one_x = 4;
        let mut d_x = LinearMap::new(1);
        let mut push = LinearMap::new(n);
        for g in l.gens() {
            d_x.set(g, d_l.image(g));
            push.set(g, e(g));
        }
        let mut pull = LinearMap::new(0);
        pull.set(one_x, e(ONE));
        Ok(ToyGeometry {
            n,
            ring,
            l: Arc::new(l),
            d_l,
            product,
            x: Arc::new(x),
            d_x,
            one_x,
            push,
            pull,
        })
    }

    pub fn mul(&self, a: Gen, b: Gen) -> Element {
        self.product.get(&(a, b)).cloned().unwrap_or_default()
    }

    pub fn zeta(&self) -> Element {
        self.push.image(ONE)
    }

    pub fn algebra(&self, name: &str, curvature: &Element) -> AInfty {
        from_dga(name, self.ring.clone(), self.l.clone(), Some(ONE), curvature, &self.d_l, |a, b| self.mul(a, b))
    }

    pub fn target(&self) -> InteriorAlgebra {
        InteriorAlgebra { module: self.x.clone(), differential: self.d_x.clone(), one: Some(self.one_x) }
    }

    /// `d^2 = 0` on both sides, Leibniz on `A_L`, and `i_*`, `i^*` chain maps.
    pub fn check(&self, cap: &Cap) -> Vec<CheckLine> {
        let ring = &*self.ring;
        let ok = |name: &str, bad: Vec<String>| {
            CheckLine::new(name, bad.is_empty(), if bad.is_empty() { "ok".into() } else { bad.join(", ") })
        };
        let square = |m: &GradedModule, d: &LinearMap| -> Vec<String> {
            m.gens()
                .filter(|&g| !d.apply(ring, &d.image(g), cap).is_zero())
                .map(|g| m.name(g).to_string())
                .collect()
        };
        let mut leibniz = Vec::new();
        let mul_el = |a: &Element, b: Gen| -> Element {
            let mut out = Element::zero();
            for (g, s) in a.iter() {
                out.add_assign(&self.mul(g, b).scale(ring, s, cap));
            }
            out
        };
        let mul_er = |a: Gen, b: &Element| -> Element {
            let mut out = Element::zero();
            for (g, s) in b.iter() {
                out.add_assign(&self.mul(a, g).scale(ring, s, cap));
            }
            out
        };
        for a in self.l.gens() {
            for b in self.l.gens() {
                let lhs = self.d_l.apply(ring, &self.mul(a, b), cap);
                let mut rhs = mul_el(&self.d_l.image(a), b);
                rhs.add_assign(&mul_er(a, &self.d_l.image(b)).signed(self.l.parity(a)));
                if lhs != rhs {
                    leibniz.push(format!("{}·{}", self.l.name(a), self.l.name(b)));
                }
            }
        }
        let chain = |f: &LinearMap, src: &GradedModule, d_src: &LinearMap, d_dst: &LinearMap| -> Vec<String> {
            src.gens()
                .filter(|&g| d_dst.apply(ring, &f.image(g), cap) != f.apply(ring, &d_src.image(g), cap))
                .map(|g| src.name(g).to_string())
                .collect()
        };
        vec![
            ok("d_L^2 = 0", square(&self.l, &self.d_l)),
            ok("d_T^2 = 0", square(&self.x, &self.d_x)),
            ok("Leibniz on A_L", leibniz),
            ok("i_* is a chain map", chain(&self.push, &self.l, &self.d_l, &self.d_x)),
            ok("i^* is a chain map", chain(&self.pull, &self.x, &self.d_x, &self.d_l)),
        ]
    }

    /// `p_{1,0}(g) = (-1)^{(n+1)||g||} i_* g`.
    pub fn classical_p(&self) -> SparseFamily {
        let mut p = SparseFamily::new();
        for g in self.l.gens() {
            let sign = Parity::of((self.n + 1) * self.l.shifted(g));
            p.add(&[g], &[], &self.push.image(g).signed(sign));
        }
        p
    }

    fn qfamily(&self, a: &AInfty) -> QFamily {
        let mut ops = SparseFamily::new();
        for (t, v) in a.sorted_ops() {
            ops.add(t, &[], v);
        }
        QFamily {
            ring: self.ring.clone(),
            module: self.l.clone(),
            interior: self.target(),
            ops,
            unit: Some(ONE),
            classical_d: Some(self.d_l.clone()),
        }
    }
}

/// The zero-energy instance on the standard toy: `p = p_{1,0}` only,
/// `q_{1,0} = d`, `q_{2,0} = μ_2`, no sphere operators.
pub fn toy_zero_energy(n: i64) -> Result<OCInstance, OpenClosedError> {
    toy_zero_energy_over(n, Arc::new(Ring::rationals()))
}

pub fn toy_zero_energy_over(n: i64, ring: Arc<Ring>) -> Result<OCInstance, OpenClosedError> {
    let geom = ToyGeometry::standard(n, ring, &[])?;
    let a = geom.algebra(&format!("toy_zero_energy(n={n})"), &Element::zero());
    Ok(OCInstance {
        name: a.name.clone(),
        n,
        q: geom.qfamily(&a),
        p: geom.classical_p(),
        sphere: Some(SphereTerms { ops: SparseFamily::new(), zeta: geom.zeta(), eta: None }),
    })
}

/// A curved instance with a null-homologous Lagrangian.
#[derive(Clone, Debug)]
pub struct CurvedToy {
    pub geometry: ToyGeometry,
    pub inst: OCInstance,
    /// A second primitive, `eta + w`.
    pub eta_alt: Element,
}

/// `n = 2`, `μ_0 = T xy` with `ω = 1` and Maslov index 0. The target gains
/// `η` with `d η = -u_1`, and pairs `ν -> w`, `ν' -> w'`. The sphere operator
/// is `u_1 -> -T u_xy`, `η -> T u_x`, `ν -> T ν'`, `w -> T w'`.
pub fn curved_toy() -> Result<CurvedToy, OpenClosedError> {
    let ring = Arc::new(Ring::new(
        PiGroup::new(vec![Q::one()], vec![0]).map_err(|e| OpenClosedError::Geometry(e.to_string()))?,
        FormalVarSpec::new(vec![]),
    ));
    let extra = [("eta", 1), ("nu", 0), ("w", 1), ("nu'", 2), ("w'", 3)];
    let mut geom = ToyGeometry::standard(2, ring.clone(), &extra)?;
    let idx = |s: &str| geom.x.index(s).map_err(|e| OpenClosedError::Geometry(e.to_string()));
    let (eta, nu, w, nu2, w2) = (idx("eta")?, idx("nu")?, idx("w")?, idx("nu'")?, idx("w'")?);
    let one = ring.one();
    let t = ring.t_class(&[1]).map_err(|e| OpenClosedError::Geometry(e.to_string()))?;
    let e = |g: Gen| Element::single(g, one.clone());
    let te = |g: Gen| Element::single(g, t.clone());
    geom.d_x.set(eta, e(ONE).neg());
    geom.d_x.set(nu, e(w));
    geom.d_x.set(nu2, e(w2));
    let curvature = Element::single(XY, t.clone());
    let a = geom.algebra("curved_toy", &curvature);
    let mut sphere = SparseFamily::new();
    sphere.add(&[], &[ONE], &te(XY).neg());
    sphere.add(&[], &[eta], &te(X));
    sphere.add(&[], &[nu], &te(nu2));
    sphere.add(&[], &[w], &te(w2));
    let mut eta_alt = e(eta);
    eta_alt.add_assign(&e(w));
    let inst = OCInstance {
        name: a.name.clone(),
        n: 2,
        q: geom.qfamily(&a),
        p: geom.classical_p(),
        sphere: Some(SphereTerms { ops: sphere, zeta: geom.zeta(), eta: Some(e(eta)) }),
    };
    Ok(CurvedToy { geometry: geom, inst, eta_alt })
}
