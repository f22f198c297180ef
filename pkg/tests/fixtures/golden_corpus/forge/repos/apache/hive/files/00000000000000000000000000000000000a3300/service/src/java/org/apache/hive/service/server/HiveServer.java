package org.apache.hive.service.server;

import org.slf4j.Logger;
import org.slf4j.LoggerFactory;

public class HiveServer {

    private static final Logger LOG = LoggerFactory.getLogger(HiveServer.class);

    public void start(int port) {
        thriftService.bind(port);
        acceptLoop.start();
        LOG.info("Server started on port {}", port);
    }
}
