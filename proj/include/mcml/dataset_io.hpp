#pragma once

#include <iosfwd>
#include <string>

#include "mcml/model.hpp"

namespace mcml {

// CSV dataset with a header line naming response columns (prefix 'y') and
// covariate columns (prefix 'x'), e.g. "y,x1" or "y1,y2,y3,y4,x1". Row order
// is preserved; malformed input raises ParseError with the offending line.
Dataset load_dataset(const std::string& path);

// Stream variant; `name` labels error messages.
Dataset parse_dataset_csv(std::istream& in, const std::string& name);

}  // namespace mcml
