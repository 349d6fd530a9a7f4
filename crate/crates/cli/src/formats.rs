//! JSON file formats. Every rational is a string (`"7/10"`), never a float.

use std::fs;
use std::path::Path;

use num_bigint::BigInt;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use partmech::generators::GadgetMeta;
use partmech::mechanism::{Bundle, ChooseOneMenu, MenuOption, PricedPartition};
use partmech::rational::{format_rational, parse_rational};
use partmech::{DiscreteDist, ProductInstance, Rational};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ItemRecord {
    pub values: Vec<String>,
    pub probs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub items: Vec<ItemRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleRecord {
    pub items: Vec<usize>,
    pub price: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechanismFile {
    pub bundles: Vec<BundleRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MenuFile {
    pub options: Vec<BundleRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GadgetMetaFile {
    pub x: usize,
    pub y: usize,
    pub z: usize,
    pub edges: Vec<[usize; 3]>,
    pub pi: Vec<String>,
    pub pi_min: String,
    pub pi_max: String,
}

fn parse_all(xs: &[String]) -> Result<Vec<Rational>, CliError> {
    xs.iter()
        .map(|s| parse_rational(s).map_err(CliError::from))
        .collect()
}

fn render_all(xs: &[Rational]) -> Vec<String> {
    xs.iter().map(format_rational).collect()
}

impl InstanceFile {
    pub fn from_instance(inst: &ProductInstance) -> Self {
        InstanceFile {
            items: inst
                .items()
                .iter()
                .map(|d| ItemRecord {
                    values: render_all(d.support()),
                    probs: render_all(d.probs()),
                })
                .collect(),
        }
    }

    pub fn to_instance(&self) -> Result<ProductInstance, CliError> {
        let items = self
            .items
            .iter()
            .map(|r| {
                Ok(DiscreteDist::new(
                    parse_all(&r.values)?,
                    parse_all(&r.probs)?,
                )?)
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(ProductInstance::new(items)?)
    }
}

impl MechanismFile {
    pub fn from_partition(pp: &PricedPartition) -> Self {
        MechanismFile {
            bundles: pp
                .bundles()
                .iter()
                .map(|b| BundleRecord {
                    items: b.items.clone(),
                    price: format_rational(&b.price),
                })
                .collect(),
        }
    }

    pub fn to_partition(&self) -> Result<PricedPartition, CliError> {
        let bundles = self
            .bundles
            .iter()
            .map(|b| {
                Ok(Bundle {
                    items: b.items.clone(),
                    price: parse_rational(&b.price)?,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(PricedPartition::new(bundles))
    }
}

impl MenuFile {
    pub fn from_menu(menu: &ChooseOneMenu) -> Self {
        MenuFile {
            options: menu
                .options
                .iter()
                .map(|o| BundleRecord {
                    items: o.items.clone(),
                    price: format_rational(&o.price),
                })
                .collect(),
        }
    }

    pub fn to_menu(&self) -> Result<ChooseOneMenu, CliError> {
        let options = self
            .options
            .iter()
            .map(|o| {
                Ok(MenuOption {
                    items: o.items.clone(),
                    price: parse_rational(&o.price)?,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(ChooseOneMenu { options })
    }
}

fn parse_int(s: &str) -> Result<BigInt, CliError> {
    s.parse()
        .map_err(|_| CliError::Usage(format!("bad integer {s:?} in gadget metadata")))
}

impl GadgetMetaFile {
    pub fn from_meta(meta: &GadgetMeta) -> Self {
        GadgetMetaFile {
            x: meta.x,
            y: meta.y,
            z: meta.z,
            edges: meta.edges.iter().map(|&(a, b, c)| [a, b, c]).collect(),
            pi: meta.pi.iter().map(|p| p.to_string()).collect(),
            pi_min: meta.pi_min.to_string(),
            pi_max: meta.pi_max.to_string(),
        }
    }

    pub fn to_meta(&self) -> Result<GadgetMeta, CliError> {
        Ok(GadgetMeta {
            x: self.x,
            y: self.y,
            z: self.z,
            edges: self.edges.iter().map(|e| (e[0], e[1], e[2])).collect(),
            pi: self
                .pi
                .iter()
                .map(|p| parse_int(p))
                .collect::<Result<_, _>>()?,
            pi_min: parse_int(&self.pi_min)?,
            pi_max: parse_int(&self.pi_max)?,
        })
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Json {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_instance(path: &Path) -> Result<ProductInstance, CliError> {
    read_json::<InstanceFile>(path)?.to_instance()
}
