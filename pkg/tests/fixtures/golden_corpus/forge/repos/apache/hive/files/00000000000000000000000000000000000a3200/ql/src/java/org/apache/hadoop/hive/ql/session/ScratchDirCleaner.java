package org.apache.hadoop.hive.ql.session;

import org.slf4j.Logger;
import org.slf4j.LoggerFactory;

public class ScratchDirCleaner {

    private static final Logger LOG = LoggerFactory.getLogger(ScratchDirCleaner.class);

    void clean(Path scratchDir) {
        if (fs.exists(scratchDir)) {
            LOG.info("Cleaning scratch dir");
            fs.delete(scratchDir, true);
        }
    }
}
