#pragma once

namespace netlqr {

const char* version_string();

}  // namespace netlqr
