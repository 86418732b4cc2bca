//! MNIST (IDX) and CIFAR-10 (binary batch) loaders plus seeded splitting.
//!
//! Pixels are scaled by 1/255 into `[0, 1]`; no other normalization is applied.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::nn::Tensor;

pub const NUM_CLASSES: usize = 10;

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

const CIFAR_SIDE: usize = 32;
const CIFAR_CHANNELS: usize = 3;
const CIFAR_RECORD: usize = 1 + CIFAR_CHANNELS * CIFAR_SIDE * CIFAR_SIDE;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: bad magic number {found:#010x}, expected {expected:#010x}")]
    BadMagic { path: PathBuf, expected: u32, found: u32 },
    #[error("{path}: truncated file ({len} bytes, header promises {expected})")]
    Truncated { path: PathBuf, len: usize, expected: usize },
    #[error("image file holds {images} samples but label file holds {labels}")]
    CountMismatch { images: usize, labels: usize },
    #[error("{path}: length {len} is not a multiple of the {record}-byte record size")]
    RecordLength { path: PathBuf, len: usize, record: usize },
    #[error("{path}: label {label} at sample {index} is outside 0..=9")]
    BadLabel { path: PathBuf, index: usize, label: u8 },
    #[error("no CIFAR-10 batch files given")]
    NoFiles,
    #[error("none of {0:?} exists")]
    Missing(Vec<PathBuf>),
    #[error("{0}")]
    Argument(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// `(N, C, H, W)` with values in `[0, 1]`.
    pub images: Tensor,
    pub labels: Vec<u8>,
    pub name: String,
}

impl Dataset {
    pub fn new(images: Tensor, labels: Vec<u8>, name: impl Into<String>) -> Self {
        assert_eq!(images.shape().len(), 4, "images must be (N, C, H, W)");
        assert_eq!(images.shape()[0], labels.len(), "one label per image");
        Self { images, labels, name: name.into() }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// `(C, H, W)` of one sample.
    pub fn sample_shape(&self) -> (usize, usize, usize) {
        let s = self.images.shape();
        (s[1], s[2], s[3])
    }

    pub fn sample_len(&self) -> usize {
        let (c, h, w) = self.sample_shape();
        c * h * w
    }

    pub fn image(&self, i: usize) -> &[f64] {
        let n = self.sample_len();
        &self.images.data()[i * n..(i + 1) * n]
    }

    /// New dataset holding the given samples in the given order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        let n = self.sample_len();
        let mut data = Vec::with_capacity(indices.len() * n);
        for &i in indices {
            data.extend_from_slice(self.image(i));
        }
        let (c, h, w) = self.sample_shape();
        Dataset {
            images: Tensor::from_vec(vec![indices.len(), c, h, w], data),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            name: self.name.clone(),
        }
    }

    /// Copies a batch of samples into `(B, C, H, W)` and their labels.
    pub fn batch(&self, indices: &[usize]) -> (Tensor, Vec<u8>) {
        let d = self.select(indices);
        (d.images, d.labels)
    }
}

fn read(path: &Path) -> Result<Vec<u8>, DataError> {
    fs::read(path).map_err(|source| DataError::Io { path: path.to_path_buf(), source })
}

fn be_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_be_bytes(bytes[at..at + 4].try_into().unwrap())
}

fn parse_idx(path: &Path, bytes: &[u8], magic: u32, dims: usize) -> Result<(Vec<usize>, usize), DataError> {
    if bytes.len() < 4 {
        return Err(DataError::Truncated { path: path.into(), len: bytes.len(), expected: 4 });
    }
    let found = be_u32(bytes, 0);
    if found != magic {
        return Err(DataError::BadMagic { path: path.into(), expected: magic, found });
    }
    let header = 4 + 4 * dims;
    if bytes.len() < header {
        return Err(DataError::Truncated { path: path.into(), len: bytes.len(), expected: header });
    }
    let shape: Vec<usize> = (0..dims).map(|i| be_u32(bytes, 4 + 4 * i) as usize).collect();
    let expected = header + shape.iter().product::<usize>();
    if bytes.len() < expected {
        return Err(DataError::Truncated { path: path.into(), len: bytes.len(), expected });
    }
    Ok((shape, header))
}

fn check_labels(path: &Path, labels: &[u8]) -> Result<(), DataError> {
    match labels.iter().position(|&l| l as usize >= NUM_CLASSES) {
        Some(index) => Err(DataError::BadLabel { path: path.into(), index, label: labels[index] }),
        None => Ok(()),
    }
}

/// Loads an IDX image file (`0x00000803`) and its label file (`0x00000801`).
pub fn load_mnist(images: impl AsRef<Path>, labels: impl AsRef<Path>) -> Result<Dataset, DataError> {
    let (ipath, lpath) = (images.as_ref(), labels.as_ref());
    let ibytes = read(ipath)?;
    let lbytes = read(lpath)?;
    let (ishape, ihead) = parse_idx(ipath, &ibytes, IDX_IMAGES_MAGIC, 3)?;
    let (lshape, lhead) = parse_idx(lpath, &lbytes, IDX_LABELS_MAGIC, 1)?;
    let (n, h, w) = (ishape[0], ishape[1], ishape[2]);
    if n != lshape[0] {
        return Err(DataError::CountMismatch { images: n, labels: lshape[0] });
    }
    let labels = lbytes[lhead..lhead + n].to_vec();
    check_labels(lpath, &labels)?;
    let pixels = ibytes[ihead..ihead + n * h * w].iter().map(|&b| f64::from(b) / 255.0).collect();
    Ok(Dataset::new(Tensor::from_vec(vec![n, 1, h, w], pixels), labels, "mnist"))
}

/// Loads and concatenates CIFAR-10 binary batches (1 label byte followed by
/// the 1024 red, 1024 green and 1024 blue bytes of each record).
pub fn load_cifar10<P: AsRef<Path>>(files: &[P]) -> Result<Dataset, DataError> {
    if files.is_empty() {
        return Err(DataError::NoFiles);
    }
    let mut labels = Vec::new();
    let mut pixels = Vec::new();
    for f in files {
        let path = f.as_ref();
        let bytes = read(path)?;
        if bytes.len() % CIFAR_RECORD != 0 {
            return Err(DataError::RecordLength { path: path.into(), len: bytes.len(), record: CIFAR_RECORD });
        }
        for (i, rec) in bytes.chunks_exact(CIFAR_RECORD).enumerate() {
            if rec[0] as usize >= NUM_CLASSES {
                return Err(DataError::BadLabel { path: path.into(), index: i, label: rec[0] });
            }
            labels.push(rec[0]);
            pixels.extend(rec[1..].iter().map(|&b| f64::from(b) / 255.0));
        }
    }
    let n = labels.len();
    let images = Tensor::from_vec(vec![n, CIFAR_CHANNELS, CIFAR_SIDE, CIFAR_SIDE], pixels);
    Ok(Dataset::new(images, labels, "cifar10"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

fn first_existing(candidates: Vec<PathBuf>) -> Result<PathBuf, DataError> {
    candidates.iter().find(|p| p.is_file()).cloned().ok_or(DataError::Missing(candidates))
}

/// Resolves the standard MNIST file names inside `dir`, accepting both the
/// `train-images-idx3-ubyte` and `train-images.idx3-ubyte` spellings.
pub fn mnist_files(dir: &Path, split: Split) -> Result<(PathBuf, PathBuf), DataError> {
    let prefix = match split {
        Split::Train => "train",
        Split::Test => "t10k",
    };
    let find = |kind: &str, idx: &str| {
        first_existing(vec![
            dir.join(format!("{prefix}-{kind}-{idx}-ubyte")),
            dir.join(format!("{prefix}-{kind}.{idx}-ubyte")),
        ])
    };
    Ok((find("images", "idx3")?, find("labels", "idx1")?))
}

pub fn load_mnist_dir(dir: impl AsRef<Path>, split: Split) -> Result<Dataset, DataError> {
    let (i, l) = mnist_files(dir.as_ref(), split)?;
    load_mnist(i, l)
}

/// Resolves `data_batch_{1..5}.bin` or `test_batch.bin` inside `dir` (or its
/// `cifar-10-batches-bin` subdirectory).
pub fn cifar10_files(dir: &Path, split: Split) -> Result<Vec<PathBuf>, DataError> {
    let names: Vec<String> = match split {
        Split::Train => (1..=5).map(|i| format!("data_batch_{i}.bin")).collect(),
        Split::Test => vec!["test_batch.bin".into()],
    };
    names.iter().map(|n| first_existing(vec![dir.join(n), dir.join("cifar-10-batches-bin").join(n)])).collect()
}

pub fn load_cifar10_dir(dir: impl AsRef<Path>, split: Split) -> Result<Dataset, DataError> {
    load_cifar10(&cifar10_files(dir.as_ref(), split)?)
}

/// Seeded shuffle of `0..n` cut into parts of `round(fraction * n)` and the rest.
pub fn split_indices(n: usize, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>), DataError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(DataError::Argument(format!("split fraction {fraction} must lie in (0, 1)")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let cut = (fraction * n as f64).round() as usize;
    let rest = idx.split_off(cut);
    Ok((idx, rest))
}

pub fn split(dataset: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset), DataError> {
    let (a, b) = split_indices(dataset.len(), fraction, seed)?;
    Ok((dataset.select(&a), dataset.select(&b)))
}

/// Seeded uniform sample of `n` distinct indices from `0..len`.
pub fn subsample_indices(len: usize, n: usize, seed: u64) -> Result<Vec<usize>, DataError> {
    if n == 0 || n > len {
        return Err(DataError::Argument(format!("cannot draw {n} samples from {len}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(rand::seq::index::sample(&mut rng, len, n).into_vec())
}

pub fn subsample(dataset: &Dataset, n: usize, seed: u64) -> Result<Dataset, DataError> {
    Ok(dataset.select(&subsample_indices(dataset.len(), n, seed)?))
}
