#ifndef CSG_CORE_REAL_HPP_
#define CSG_CORE_REAL_HPP_

// The numeric core is compiled twice: a float build for training and a
// double build for gradient checks. Each build lives in its own inline
// namespace so both can be linked into one binary.
#ifdef CSG_USE_DOUBLE
#define CSG_PRECISION_NS f64
#else
#define CSG_PRECISION_NS f32
#endif

#define CSG_NAMESPACE_BEGIN \
  namespace csg {           \
  inline namespace CSG_PRECISION_NS {
#define CSG_NAMESPACE_END \
  }                       \
  }

CSG_NAMESPACE_BEGIN

#ifdef CSG_USE_DOUBLE
using Real = double;
inline constexpr const char* kRealName = "f64";
#else
using Real = float;
inline constexpr const char* kRealName = "f32";
#endif

CSG_NAMESPACE_END

#endif  // CSG_CORE_REAL_HPP_
