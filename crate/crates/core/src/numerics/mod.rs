pub mod banded;
pub mod gmres;
pub mod linreg;
pub mod ode;
pub mod quad;
pub mod roots;
pub mod special;
