#pragma once

// String specs for 1-D and n-D N-functions, as used in config files and on the
// command line.
//
//   1-D:  power(p=2[,scale=s])   powerlog(p,alpha,c[,scale])   exppow(alpha[,scale])
//         explin([scale])        table(path)
//   n-D:  sepsum[f1,f2,...]      radial[f]                     quadratic
//         composite[rows=(1,-1);(1,0),funcs=f1;f2]
//
// Arguments are positional or named; numbers may be written as `e` or `pi`.

#include <string_view>

#include "aniso/young1d.hpp"
#include "aniso/youngnd.hpp"

namespace aniso {

YoungFunction1D parse_young(std::string_view spec);

/// `dim` supplies the dimension of radial and quadratic specs; ignored otherwise.
NFunction parse_nfunction(std::string_view spec, int dim = 0);

}  // namespace aniso
