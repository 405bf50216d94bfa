// HTTP service entry point. Configuration comes from flags, with the
// environment (LADDER_DATA_DIR, LADDER_PORT) as fallback.

#include "ladder/service.hpp"

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

int main(int argc, char** argv) {
  CLI::App app{"Leaderboard HTTP service"};
  std::string data_dir;
  std::string host = "0.0.0.0";
  int port = 0;
  app.add_option("--data-dir", data_dir, "competition data directory")
      ->envname("LADDER_DATA_DIR");
  app.add_option("--host", host, "bind address");
  app.add_option("--port", port, "listen port")->envname("LADDER_PORT");
  CLI11_PARSE(app, argc, argv);

  if (data_dir.empty()) {
    std::cerr << "error: --data-dir or LADDER_DATA_DIR required\n";
    return 2;
  }
  if (port <= 0) port = 8080;

  try {
    ladder::Service service(data_dir);
    std::cerr << "serving " << data_dir << " on " << host << ":" << port
              << '\n';
    if (!service.listen(host, port)) {
      std::cerr << "error: failed to bind " << host << ":" << port << '\n';
      return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
