#include <httplib.h>

#include <cstdlib>
#include <iostream>
#include <string>

#include "rwseg/service.hpp"

int main() {
  std::string bind = "127.0.0.1:8080";
  if (const char* b = std::getenv("RWSEG_BIND"); b && *b) bind = b;
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) {
    std::cerr << "RWSEG_BIND must be host:port\n";
    return 2;
  }
  const std::string host = bind.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(bind.substr(colon + 1));
  } catch (const std::exception&) {
    std::cerr << "bad port in RWSEG_BIND\n";
    return 2;
  }

  try {
    rwseg::service::Service service(rwseg::service::ServiceConfig::from_env());
    httplib::Server server;
    service.mount(server);
    std::cout << "listening on " << host << ':' << port << " (" << service.session_count() << " sessions restored)"
              << std::endl;
    if (!server.listen(host, port)) {
      std::cerr << "cannot bind " << bind << '\n';
      return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
