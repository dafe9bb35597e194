#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "gfid/model.hpp"

namespace gfid {

/// Built-in geometry for "alexnet", "vgg16" and "resnet50". Throws
/// LookupError for any other name.
///
/// Notes on the encoded geometry:
///  * input sizes include padding (AlexNet 227x227, ResNet stem 230x230);
///  * AlexNet layers 2, 4 and 5 are two-group convolutions, which is what
///    gives the 666M conv MAC total;
///  * ResNet-50 lists its 49 main-path convolutions. Stride-2 1x1
///    projections into a new stage are described on the already subsampled
///    map (stride 1), and the four projection shortcuts are not included.
NetworkDescriptor builtin_network(std::string_view name);

std::vector<std::string> builtin_network_names();

}  // namespace gfid
