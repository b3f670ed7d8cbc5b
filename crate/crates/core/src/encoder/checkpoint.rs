//! Versioned text checkpoints. Values are written in shortest round-trip
//! form, so save followed by load reproduces every weight bit for bit.

use std::io::{BufRead, Write};
use std::path::Path;

use super::network::{Architecture, EncoderParams};
use super::TrainConfig;
use crate::error::{Error, Result};

const MAGIC: &str = "senseball-encoder";
const VERSION: u32 = 1;

pub fn write_checkpoint<W: Write>(params: &EncoderParams, mut out: W) -> std::io::Result<()> {
    let a = &params.arch;
    let c = &params.config;
    writeln!(out, "{MAGIC} {VERSION}")?;
    writeln!(out, "model_dim {}", a.model_dim)?;
    writeln!(out, "heads {}", a.heads)?;
    writeln!(out, "layers {}", a.layers)?;
    writeln!(out, "ff_dim {}", a.ff_dim)?;
    writeln!(out, "head_hidden {}", a.head_hidden)?;
    writeln!(out, "output_dim {}", a.output_dim)?;
    writeln!(out, "window {}", c.window)?;
    writeln!(out, "learning_rate {:e}", c.learning_rate)?;
    writeln!(out, "epochs {}", c.epochs)?;
    writeln!(out, "batch_size {}", c.batch_size)?;
    writeln!(out, "seed {}", c.seed)?;
    writeln!(out, "ff_multiplier {}", c.ff_multiplier)?;
    for (name, values) in params.tensors() {
        writeln!(out, "tensor {name} {}", values.len())?;
        for (i, v) in values.iter().enumerate() {
            if i > 0 {
                out.write_all(b" ")?;
            }
            write!(out, "{v:e}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn save_checkpoint(params: &EncoderParams, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_checkpoint(params, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_checkpoint<R: BufRead>(reader: R, source_name: &str) -> Result<EncoderParams> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((n, Ok(l))) => Ok((n, l)),
            Some((_, Err(e))) => Err(e.into()),
            None => Err(Error::parse(source_name, 0, format!("unexpected end of file, expected {what}"))),
        }
    };
    let (n, header) = next("header")?;
    if header != format!("{MAGIC} {VERSION}") {
        return Err(Error::parse(source_name, n, format!("unsupported checkpoint header {header:?}")));
    }
    let mut field = |key: &str| -> Result<String> {
        let (n, line) = next(key)?;
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok(v.to_string()),
            _ => Err(Error::parse(source_name, n, format!("expected `{key}`"))),
        }
    };
    fn num<T: std::str::FromStr>(s: String, key: &str, src: &str) -> Result<T> {
        s.parse().map_err(|_| Error::parse(src, 0, format!("bad value for {key}: {s:?}")))
    }
    let arch = Architecture {
        model_dim: num(field("model_dim")?, "model_dim", source_name)?,
        heads: num(field("heads")?, "heads", source_name)?,
        layers: num(field("layers")?, "layers", source_name)?,
        ff_dim: num(field("ff_dim")?, "ff_dim", source_name)?,
        head_hidden: num(field("head_hidden")?, "head_hidden", source_name)?,
        output_dim: num(field("output_dim")?, "output_dim", source_name)?,
    };
    let config = TrainConfig {
        window: num(field("window")?, "window", source_name)?,
        learning_rate: num(field("learning_rate")?, "learning_rate", source_name)?,
        epochs: num(field("epochs")?, "epochs", source_name)?,
        batch_size: num(field("batch_size")?, "batch_size", source_name)?,
        seed: num(field("seed")?, "seed", source_name)?,
        layers: arch.layers,
        heads: arch.heads,
        ff_multiplier: num(field("ff_multiplier")?, "ff_multiplier", source_name)?,
    };
    arch.validate()?;
    let mut params = EncoderParams::init(arch, &config)?;
    let names: Vec<(String, usize)> = params.tensors().into_iter().map(|(n, t)| (n, t.len())).collect();
    for ((name, len), dst) in names.into_iter().zip(params.tensors_mut()) {
        let (n, line) = next(&name)?;
        if line != format!("tensor {name} {len}") {
            return Err(Error::parse(source_name, n, format!("expected tensor {name} of length {len}")));
        }
        let (n, values) = next(&name)?;
        let parsed = values
            .split(' ')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::parse(source_name, n, format!("bad value in {name}")))?;
        if parsed.len() != len || parsed.iter().any(|x| !x.is_finite()) {
            return Err(Error::parse(source_name, n, format!("tensor {name} needs {len} finite values")));
        }
        *dst = parsed;
    }
    Ok(params)
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<EncoderParams> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_checkpoint(std::io::BufReader::new(file), &path.display().to_string())
}
