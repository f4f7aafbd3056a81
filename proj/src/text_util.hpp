#pragma once

#include <string>

namespace flutesim {

// Strips a '#' comment. Note names like C#4 contain '#', so a comment
// marker only counts at the start of the line or after whitespace.
inline void strip_comment(std::string& line) {
    for (std::size_t pos = line.find('#'); pos != std::string::npos;
         pos = line.find('#', pos + 1)) {
        if (pos == 0 || line[pos - 1] == ' ' || line[pos - 1] == '\t') {
            line.erase(pos);
            return;
        }
    }
}

} // namespace flutesim
