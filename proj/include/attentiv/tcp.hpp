#pragma once

#include "attentiv/wire_protocol.hpp"

#include <atomic>
#include <cstdint>
#include <list>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace attentiv::net {

inline constexpr std::size_t kMaxLineBytes = 16 * 1024 * 1024;

// Line-delimited JSON over TCP, one thread per connection.
class TcpServer {
 public:
  // port 0 picks an ephemeral port; see port() after start().
  TcpServer(wire::ProtocolHandler& handler, std::uint16_t port,
            std::string bind_address = "127.0.0.1");
  ~TcpServer();
  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  void start();
  void stop();
  void wait();  // blocks until stop() is called from another thread

  std::uint16_t port() const { return port_; }

 private:
  void accept_loop();
  void serve(int fd);
  void serve_lines(int fd);

  wire::ProtocolHandler& handler_;
  std::uint16_t port_;
  std::string bind_address_;
  int listen_fd_ = -1;
  std::atomic<bool> running_{false};
  std::thread acceptor_;
  std::mutex mutex_;
  std::list<std::thread> workers_;
  std::vector<int> client_fds_;
};

class LineClient {
 public:
  // Throws network error when the connection fails.
  LineClient(const std::string& host, std::uint16_t port);
  ~LineClient();
  LineClient(const LineClient&) = delete;
  LineClient& operator=(const LineClient&) = delete;

  void send_line(const std::string& line);
  std::optional<std::string> read_line();

  // Sends one request and collects replies up to and including the terminal one.
  std::vector<wire::json> request(const wire::json& message);

 private:
  int fd_ = -1;
  std::string buffer_;
};

}  // namespace attentiv::net
