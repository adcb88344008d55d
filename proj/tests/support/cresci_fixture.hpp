#pragma once

// Writes one CSV per domain whose tweet and reply-pair counts equal the
// published Cresci-2017 conversation counts. Replies are wired by hand: in a
// domain with n tweets and c conversations, tweet (c + k) answers tweet k.
// One extra row per file points at a tweet that does not exist.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace advbot::testing {

struct FixtureDomain {
  std::string domain;
  long tweets;
  long conversations;
};

inline const std::vector<FixtureDomain>& cresci_fixture_domains() {
  static const std::vector<FixtureDomain> d{{"human", 39264, 16967},
                                            {"bot_political", 3810, 1778},
                                            {"bot_financial", 932, 434},
                                            {"bot_commercial", 430, 200}};
  return d;
}

// Returns "domain=path" entries.
inline std::vector<std::string> write_cresci_fixture(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> sources;
  long base = 1000000;
  for (const auto& d : cresci_fixture_domains()) {
    const auto path = dir / (d.domain + ".csv");
    std::ofstream out(path, std::ios::binary);
    out << "id,user_id,text,in_reply_to_status_id\n";
    for (long k = 0; k < d.tweets; ++k) {
      const long id = base + k;
      std::string reply;
      if (k >= d.conversations && k < 2 * d.conversations) reply = std::to_string(base + k - d.conversations);
      if (k == d.tweets - 1 && reply.empty()) reply = "1";  // dangling
      out << id << ',' << (k % 97) << ",\"tweet " << k << ", from " << d.domain << " \"\"quoted\"\"\"," << reply
          << '\n';
    }
    sources.push_back(d.domain + "=" + path.string());
    base += 1000000;
  }
  return sources;
}

}  // namespace advbot::testing
