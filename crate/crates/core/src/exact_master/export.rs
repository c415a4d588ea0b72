use std::io::{self, Write};

use super::evolve::StateDistribution;
use super::generator::GeneratorMatrix;
use crate::distribution::HeightDistribution;
use crate::lattice::StateSpace;

/// `index,config` with the configuration rendered as `(h1,...,hn)`.
pub fn write_states_csv<W: Write>(mut w: W, space: &StateSpace) -> io::Result<()> {
    writeln!(w, "index,config")?;
    for (i, c) in space.configs().iter().enumerate() {
        writeln!(w, "{i},\"{c}\"")?;
    }
    Ok(())
}

pub fn write_generator_csv<W: Write>(mut w: W, gen: &GeneratorMatrix) -> io::Result<()> {
    writeln!(w, "row,col,value")?;
    for (r, c, v) in gen.triplets() {
        writeln!(w, "{r},{c},{v:?}")?;
    }
    Ok(())
}

pub fn write_distribution_csv<W: Write>(
    mut w: W,
    space: &StateSpace,
    dists: &[StateDistribution],
) -> io::Result<()> {
    writeln!(w, "time,index,config,probability")?;
    for d in dists {
        for (i, (p, c)) in d.probabilities.iter().zip(space.configs()).enumerate() {
            writeln!(w, "{:?},{i},\"{c}\",{p:?}", d.time)?;
        }
    }
    Ok(())
}

pub fn write_marginal_csv<W: Write>(mut w: W, marginals: &[HeightDistribution]) -> io::Result<()> {
    writeln!(w, "time,k,probability")?;
    for m in marginals {
        for (k, p) in m.probabilities.iter().enumerate() {
            writeln!(w, "{:?},{k},{p:?}", m.time)?;
        }
    }
    Ok(())
}
