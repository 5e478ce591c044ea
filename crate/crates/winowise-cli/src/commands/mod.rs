pub mod calibrate;
pub mod conv;
pub mod gen;
pub mod quant_error;
pub mod simulate;
