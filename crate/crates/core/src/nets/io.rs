//! Model file: magic line, config echo, labels, vocabulary, then every
//! parameter tensor.

use std::fs;
use std::path::Path;

use super::{Arch, ClassifierModel, NetConfig, Params};
use crate::corpus::{DatasetSpec, Vocabulary};
use crate::error::{Error, Result};
use crate::persist::{expect_shape, Reader, Writer};

pub const NET_MAGIC: &str = "headvote-net 1";

impl ClassifierModel {
    pub fn to_text(&self) -> String {
        let c = &self.config;
        let mut w = Writer::new(NET_MAGIC);
        w.field("arch", c.arch)
            .field("dim", c.dim)
            .field("classes", c.num_classes)
            .field("filter_width", c.filter_width)
            .field("num_filters", c.num_filters)
            .field("hidden", c.hidden)
            .field("max_len", c.max_len)
            .field("lr", c.lr)
            .field("epochs", c.epochs)
            .field("batch_size", c.batch_size)
            .field("seed", c.seed)
            .field("fine_tune", c.fine_tune_embeddings)
            .field("init", c.init.tag())
            .field("granularity", c.granularity.tag())
            .list("labels", self.spec.class_names())
            .list("vocab", self.vocab.tokens());
        for (name, m) in self.params.tensors() {
            w.tensor(name, m);
        }
        w.finish()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut r = Reader::new(text, NET_MAGIC)?;
        let arch: Arch = r.field("arch")?;
        let mut config = NetConfig::new(arch, 2);
        config.dim = r.field("dim")?;
        config.num_classes = r.field("classes")?;
        config.filter_width = r.field("filter_width")?;
        config.num_filters = r.field("num_filters")?;
        config.hidden = r.field("hidden")?;
        config.max_len = r.field("max_len")?;
        config.lr = r.field("lr")?;
        config.epochs = r.field("epochs")?;
        config.batch_size = r.field("batch_size")?;
        config.seed = r.field("seed")?;
        config.fine_tune_embeddings = r.field("fine_tune")?;
        config.init = r.field("init")?;
        config.granularity = r.field("granularity")?;
        config
            .validate()
            .map_err(|e| Error::field("config", e.to_string()))?;
        let labels = r.list("labels")?;
        if labels.len() != config.num_classes {
            return Err(Error::field(
                "labels",
                format!("expected {} labels", config.num_classes),
            ));
        }
        let spec = DatasetSpec::new(labels).map_err(|e| Error::field("labels", e.to_string()))?;
        let tokens = r.list("vocab")?;
        let vocab = Vocabulary::from_entries(tokens.into_iter().map(|t| (t, 1)), 1);
        let mut tensors = Vec::with_capacity(Params::NAMES.len());
        for name in Params::NAMES {
            tensors.push(r.tensor(name)?);
        }
        r.finish()?;
        let [embedding, conv_w, conv_b, lstm_w, lstm_b, out_w, out_b]: [_; 7] =
            tensors.try_into().expect("seven tensors");
        let dim = config.dim;
        let (f, h, k) = (config.num_filters, config.hidden, config.num_classes);
        expect_shape("embedding", &embedding, vocab.len() + 1, dim)?;
        let (cw, cb, lw, lb) = match arch {
            Arch::Nbow => ((0, 0), (0, 0), (0, 0), (0, 0)),
            Arch::Cnn => ((f, config.filter_width * dim), (1, f), (0, 0), (0, 0)),
            Arch::Lstm => ((0, 0), (0, 0), (4 * h, dim + h), (1, 4 * h)),
        };
        expect_shape("conv_w", &conv_w, cw.0, cw.1)?;
        expect_shape("conv_b", &conv_b, cb.0, cb.1)?;
        expect_shape("lstm_w", &lstm_w, lw.0, lw.1)?;
        expect_shape("lstm_b", &lstm_b, lb.0, lb.1)?;
        expect_shape("out_w", &out_w, k, config.encoder_width())?;
        expect_shape("out_b", &out_b, 1, k)?;
        Ok(ClassifierModel {
            config,
            spec,
            vocab,
            params: Params {
                embedding,
                conv_w,
                conv_b,
                lstm_w,
                lstm_b,
                out_w,
                out_b,
            },
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}
