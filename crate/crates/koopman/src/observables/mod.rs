//! Dictionaries of measurement functions used to lift state (or delay) data,
//! with closed-form gradients and state-recovery maps.

mod delay;
mod dict;

pub use delay::{delay_embed, delay_embed_pairs};
pub use dict::{
    monomial_dictionary, monomial_from_exponents, tps_rbf_dictionary, DelayMeta, DictKind,
    Dictionary, Recovery,
};
