//! Plain-text model files built on [`KvMap`].

use std::path::Path;

use ndarray::Array2;

use super::{BinaryModel, Kernel, MulticlassModel, SvmParams};
use crate::error::{Error, Result};
use crate::kv::KvMap;
use crate::numfmt::{format_f64, format_list};
use crate::preprocess::Scaler;

const FORMAT: &str = "uldl-svm";
const VERSION: u32 = 1;

pub fn model_to_kv(model: &MulticlassModel) -> KvMap {
    let mut kv = KvMap::new();
    kv.insert("format", FORMAT);
    kv.insert("version", VERSION);
    kv.insert("kernel", model.params.kernel.name());
    if let Kernel::Rbf { gamma } = model.params.kernel {
        kv.insert("gamma", format_f64(gamma));
    }
    kv.insert("c", format_f64(model.params.c));
    kv.insert("tol", format_f64(model.params.tol));
    kv.insert("max_iter_factor", model.params.max_iter_factor);
    kv.insert(
        "classes",
        model
            .classes
            .iter()
            .map(u8::to_string)
            .collect::<Vec<_>>()
            .join(" "),
    );
    model.scaler.write_kv(&mut kv);
    kv.insert("machines", model.machines.len());
    for (m, bin) in model.machines.iter().enumerate() {
        let p = format!("machine.{m}");
        kv.insert(
            format!("{p}.pair"),
            format!("{} {}", bin.positive, bin.negative),
        );
        kv.insert(format!("{p}.bias"), format_f64(bin.bias));
        kv.insert(format!("{p}.iterations"), bin.iterations);
        kv.insert(format!("{p}.converged"), bin.converged);
        kv.insert(format!("{p}.n_sv"), bin.n_support());
        for (s, (sv, coef)) in bin
            .support_vectors
            .outer_iter()
            .zip(&bin.dual_coefs)
            .enumerate()
        {
            let mut row = vec![*coef];
            row.extend(sv.iter());
            kv.insert(format!("{p}.sv.{s}"), format_list(&row));
        }
    }
    kv
}

pub fn model_from_kv(kv: &KvMap) -> Result<MulticlassModel> {
    let format: String = kv.require("format")?;
    if format != FORMAT {
        return Err(Error::data(format!("not a model file (format = {format})")));
    }
    let version: u32 = kv.require("version")?;
    if version != VERSION {
        return Err(Error::data(format!("unsupported model version {version}")));
    }
    let kernel_name: String = kv.require("kernel")?;
    let kernel = match kernel_name.as_str() {
        "rbf" => Kernel::Rbf {
            gamma: kv.require("gamma")?,
        },
        "linear" => Kernel::Linear,
        other => return Err(Error::data(format!("unknown kernel {other:?}"))),
    };
    let params = SvmParams {
        kernel,
        c: kv.require("c")?,
        tol: kv.require("tol")?,
        max_iter_factor: kv.require("max_iter_factor")?,
    };
    params.validate().map_err(|e| Error::data(e.to_string()))?;
    let classes = kv
        .get("classes")
        .ok_or_else(|| Error::data("missing key \"classes\""))?
        .split_whitespace()
        .map(|t| {
            t.parse::<u8>()
                .map_err(|_| Error::data(format!("bad class {t:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if classes.is_empty() || classes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::data(
            "classes must be non-empty and strictly ascending",
        ));
    }
    let scaler = Scaler::read_kv(kv).map_err(|e| Error::data(e.to_string()))?;
    let dim = scaler.dim();
    let n_machines: usize = kv.require("machines")?;
    let expected = classes.len() * (classes.len() - 1) / 2;
    if n_machines != expected {
        return Err(Error::data(format!(
            "{} classes need {expected} machines, file has {n_machines}",
            classes.len()
        )));
    }
    let mut machines = Vec::with_capacity(n_machines);
    for m in 0..n_machines {
        let p = format!("machine.{m}");
        let pair = kv.require_f64_list(&format!("{p}.pair"), 2)?;
        let (positive, negative) = (pair[0] as u8, pair[1] as u8);
        if !(classes.contains(&positive) && classes.contains(&negative)) || positive >= negative {
            return Err(Error::data(format!(
                "{p}: invalid class pair {positive} {negative}"
            )));
        }
        let n_sv: usize = kv.require(&format!("{p}.n_sv"))?;
        let mut coefs = Vec::with_capacity(n_sv);
        let mut flat = Vec::with_capacity(n_sv * dim);
        for s in 0..n_sv {
            let row = kv.require_f64_list(&format!("{p}.sv.{s}"), dim + 1)?;
            coefs.push(row[0]);
            flat.extend_from_slice(&row[1..]);
        }
        machines.push(BinaryModel {
            positive,
            negative,
            support_vectors: Array2::from_shape_vec((n_sv, dim), flat)
                .expect("row lengths checked"),
            dual_coefs: coefs,
            bias: kv.require(&format!("{p}.bias"))?,
            iterations: kv.require(&format!("{p}.iterations"))?,
            converged: kv.require(&format!("{p}.converged"))?,
        });
    }
    Ok(MulticlassModel {
        params,
        scaler,
        classes,
        machines,
    })
}

pub fn save_model(model: &MulticlassModel, path: &Path) -> Result<()> {
    std::fs::write(path, model_to_kv(model).to_string())?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<MulticlassModel> {
    model_from_kv(&KvMap::read(path)?).map_err(|e| match e {
        Error::Data(msg) => Error::data(format!("{}: {msg}", path.display())),
        other => other,
    })
}
